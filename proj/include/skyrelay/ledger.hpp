#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace skyrelay {

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(const std::uint8_t* data, std::size_t len) {
  Digest out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
      out_len != out.size()) {
    throw std::runtime_error("sha256: digest computation failed");
  }
  return out;
}

inline Digest genesis_hash() {
  static const char tag[] = "skyrelay-authentication-ledger-v1";
  return sha256(reinterpret_cast<const std::uint8_t*>(tag), sizeof(tag) - 1);
}

inline std::string to_hex(const Digest& d) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (std::uint8_t b : d) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xF]);
  }
  return s;
}

inline Digest from_hex(const std::string& s) {
  if (s.size() != 64) throw std::invalid_argument("from_hex: digest must be 64 hex chars");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw std::invalid_argument("from_hex: invalid hex character");
  };
  Digest d{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<std::uint8_t>((nibble(s[2 * i]) << 4) | nibble(s[2 * i + 1]));
  }
  return d;
}

namespace detail {

inline void store_u64be(std::uint8_t* p, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v & 0xFF);
    v >>= 8;
  }
}

inline void store_u32be(std::uint8_t* p, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v & 0xFF);
    v >>= 8;
  }
}

inline void store_f64be(std::uint8_t* p, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  store_u64be(p, bits);
}

}  // namespace detail

// One per-hop authentication outcome. The hash preimage is the fixed
// big-endian layout seq | uav_id | hop | delta | timestamp-bits | prev_hash,
// so independent implementations of the chain interoperate byte for byte.
struct AuthRecord {
  std::uint64_t seq = 0;
  std::uint32_t uav_id = 0;
  std::uint32_t hop = 0;
  std::uint8_t delta_data = 0;  // 1 = node failed authentication (attacked)
  double timestamp = 0.0;       // simulated seconds
  Digest prev_hash{};
  Digest record_hash{};

  static constexpr std::size_t kPreimageSize = 8 + 4 + 4 + 1 + 8 + 32;

  std::array<std::uint8_t, kPreimageSize> preimage() const {
    std::array<std::uint8_t, kPreimageSize> buf{};
    detail::store_u64be(buf.data(), seq);
    detail::store_u32be(buf.data() + 8, uav_id);
    detail::store_u32be(buf.data() + 12, hop);
    buf[16] = delta_data;
    detail::store_f64be(buf.data() + 17, timestamp);
    std::memcpy(buf.data() + 25, prev_hash.data(), prev_hash.size());
    return buf;
  }

  Digest compute_hash() const {
    const auto buf = preimage();
    return sha256(buf.data(), buf.size());
  }

  // Full canonical serialization (preimage + stored hash); tamper tests
  // mutate these bytes.
  std::array<std::uint8_t, kPreimageSize + 32> serialize() const {
    std::array<std::uint8_t, kPreimageSize + 32> buf{};
    const auto pre = preimage();
    std::memcpy(buf.data(), pre.data(), pre.size());
    std::memcpy(buf.data() + pre.size(), record_hash.data(), record_hash.size());
    return buf;
  }

  static AuthRecord deserialize(const std::uint8_t* buf) {
    AuthRecord r;
    for (int i = 0; i < 8; ++i) r.seq = (r.seq << 8) | buf[i];
    for (int i = 8; i < 12; ++i) r.uav_id = (r.uav_id << 8) | buf[i];
    for (int i = 12; i < 16; ++i) r.hop = (r.hop << 8) | buf[i];
    r.delta_data = buf[16];
    std::uint64_t bits = 0;
    for (int i = 17; i < 25; ++i) bits = (bits << 8) | buf[i];
    std::memcpy(&r.timestamp, &bits, sizeof(bits));
    std::memcpy(r.prev_hash.data(), buf + 25, 32);
    std::memcpy(r.record_hash.data(), buf + 57, 32);
    return r;
  }
};

// Append-only hash chain of authentication outcomes. Single writer; any
// number of readers. Tampering with a stored record breaks verify().
class Ledger {
 public:
  const std::vector<AuthRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  void clear() { records_.clear(); }

  const AuthRecord& append(std::uint32_t uav_id, std::uint32_t hop, bool delta_data,
                           double timestamp) {
    AuthRecord r;
    r.seq = records_.size();
    r.uav_id = uav_id;
    r.hop = hop;
    r.delta_data = delta_data ? 1 : 0;
    r.timestamp = timestamp;
    r.prev_hash = records_.empty() ? genesis_hash() : records_.back().record_hash;
    r.record_hash = r.compute_hash();
    records_.push_back(r);
    return records_.back();
  }

  // True iff every record hash recomputes and every link matches.
  bool verify() const {
    Digest expected_prev = genesis_hash();
    for (std::size_t k = 0; k < records_.size(); ++k) {
      const AuthRecord& r = records_[k];
      if (r.seq != k) return false;
      if (r.prev_hash != expected_prev) return false;
      if (r.compute_hash() != r.record_hash) return false;
      expected_prev = r.record_hash;
    }
    return true;
  }

  // Audit export: seq,uav_id,hop,delta,timestamp,prev_hash,record_hash.
  void write_csv(std::ostream& out) const {
    out.precision(17);
    for (const auto& r : records_) {
      out << r.seq << ',' << r.uav_id << ',' << r.hop << ',' << static_cast<int>(r.delta_data)
          << ',' << r.timestamp << ',' << to_hex(r.prev_hash) << ',' << to_hex(r.record_hash)
          << '\n';
    }
  }

  static Ledger read_csv(std::istream& in) {
    Ledger ledger;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string tok;
      AuthRecord r;
      std::getline(fields, tok, ',');
      r.seq = std::stoull(tok);
      std::getline(fields, tok, ',');
      r.uav_id = static_cast<std::uint32_t>(std::stoul(tok));
      std::getline(fields, tok, ',');
      r.hop = static_cast<std::uint32_t>(std::stoul(tok));
      std::getline(fields, tok, ',');
      r.delta_data = static_cast<std::uint8_t>(std::stoi(tok));
      std::getline(fields, tok, ',');
      r.timestamp = std::stod(tok);
      std::getline(fields, tok, ',');
      r.prev_hash = from_hex(tok);
      if (!std::getline(fields, tok, ',')) {
        throw std::invalid_argument("Ledger::read_csv: malformed record line");
      }
      r.record_hash = from_hex(tok);
      ledger.records_.push_back(r);
    }
    return ledger;
  }

  // Unchecked construction, used by import paths and tamper tests.
  static Ledger from_records(std::vector<AuthRecord> records) {
    Ledger ledger;
    ledger.records_ = std::move(records);
    return ledger;
  }

 private:
  std::vector<AuthRecord> records_;
};

}  // namespace skyrelay
