#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "skyrelay/ledger.hpp"
#include "skyrelay/net_model.hpp"
#include "skyrelay/rng.hpp"
#include "skyrelay/screening.hpp"
#include "skyrelay/trust.hpp"

namespace skyrelay {

struct SdnConfig {
  std::array<Vec2, 3> controllers{{{0.0, 0.0}, {1200.0, 0.0}, {0.0, 1200.0}}};
  double clock_freq = 1e9;            // Hz
  double query_time = 0.005;          // s, consensus lookup
  double routing_packet_bits = 8192;  // route push to the source
  double ctrl_bandwidth = 1e7;        // bit/s, UAV <-> controller
  double event_packet_bits = 4096;    // initial event report

  void validate() const {
    if (clock_freq <= 0 || ctrl_bandwidth <= 0) {
      throw std::invalid_argument("SdnConfig: clock_freq and ctrl_bandwidth must be positive");
    }
    if (query_time < 0 || routing_packet_bits < 0 || event_packet_bits < 0) {
      throw std::invalid_argument("SdnConfig: delays and packet sizes must be non-negative");
    }
  }
};

struct AttackConfig {
  int n_attacked = 0;
  int reroute_limit = 2;
};

struct EnvConfig {
  double payload_bits = 1e6;  // L_data
  double lambda_r = 0.5;      // delay weight in the per-hop reward
  int max_hops = 15;          // episode step budget
  ScreeningParams screening;  // thresholds re-checked by the action mask
  bool enforce_sd = true;     // false: security-degree floor not masked
  bool use_subgraph = true;   // false: actions are all in-range neighbors
};

// Controller-side security pass over the fleet: sum of per-UAV compute
// loads divided by the controller clock. Summing cycles before the single
// division keeps the result exact for integer-valued loads.
inline double sdn_security_pass_time(const NetworkGraph& graph, const SdnConfig& sdn) {
  double cycles = 0.0;
  for (const UavNode& node : graph.nodes) {
    if (node.id != graph.destination) cycles += node.compute_load;
  }
  return cycles / sdn.clock_freq;
}

inline double sdn_process_delay(const NetworkGraph& graph, const SdnConfig& sdn) {
  return sdn.query_time + sdn_security_pass_time(graph, sdn);
}

inline double sdn_response_delay(const SdnConfig& sdn) {
  return sdn.routing_packet_bits / sdn.ctrl_bandwidth;
}

// Event upload from the source to its nearest controller.
inline double sdn_request_delay(const NetworkGraph& graph, const SdnConfig& sdn, int source) {
  double nearest = 1e300;
  for (const Vec2& c : sdn.controllers) {
    nearest = std::min(nearest, distance(graph.nodes[source].pos, c));
  }
  return sdn.event_packet_bits / sdn.ctrl_bandwidth + nearest / kLightSpeed;
}

enum class Outcome {
  InProgress,
  Delivered,
  HopBudgetExhausted,
  RerouteLimitExceeded,
  NoPath,
};

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::InProgress: return "in_progress";
    case Outcome::Delivered: return "delivered";
    case Outcome::HopBudgetExhausted: return "hop_budget";
    case Outcome::RerouteLimitExceeded: return "reroute_limit";
    case Outcome::NoPath: return "no_path";
  }
  return "?";
}

struct HopRecord {
  int index = 0;  // 1-based hop counter
  int from = -1;
  int to = -1;
  double delay = 0.0;
  double tx_energy = 0.0;
  double rx_energy = 0.0;
  bool attacked = false;  // arrival failed authentication
};

struct RerouteEvent {
  int hop_index = 0;
  int attacked_node = -1;
  double proc_delay = 0.0;
  double resp_delay = 0.0;
  bool rescreened = false;  // pruned subgraph was dead, full re-screen ran
};

struct EpisodeTrace {
  int source = -1;
  int destination = -1;
  double request_delay = 0.0;   // charged once at reset
  double process_delay = 0.0;
  double response_delay = 0.0;
  std::vector<HopRecord> hops;
  std::vector<RerouteEvent> reroutes;
  std::vector<double> eted_segments;  // relay delay per routing segment
  double dest_delay = 0.0;            // final hop into the destination
  double total_delay = 0.0;
  double total_energy = 0.0;
  double reward_sum = 0.0;
  int reroute_count = 0;
  bool success = false;
  Outcome outcome = Outcome::InProgress;
};

// Recomputes the episode delay from the trace records in event order,
// mirroring the environment's own accumulation term for term (and therefore
// bit for bit): request/process/response up front, each hop as executed,
// each reroute's controller charge right after its triggering hop.
inline double total_delay(const EpisodeTrace& trace) {
  double sum = 0.0;
  sum += trace.request_delay;
  sum += trace.process_delay;
  sum += trace.response_delay;
  std::size_t next_reroute = 0;
  for (const HopRecord& hop : trace.hops) {
    sum += hop.delay;
    while (next_reroute < trace.reroutes.size() &&
           trace.reroutes[next_reroute].hop_index == hop.index) {
      sum += trace.reroutes[next_reroute].proc_delay;
      sum += trace.reroutes[next_reroute].resp_delay;
      ++next_reroute;
    }
  }
  return sum;
}

inline double total_energy(const EpisodeTrace& trace) {
  double sum = 0.0;
  for (const HopRecord& hop : trace.hops) sum += hop.tx_energy + hop.rx_energy;
  return sum;
}

// hop lines, reroute lines, one summary line.
inline void write_trace(const EpisodeTrace& trace, std::ostream& out) {
  out.precision(17);
  for (const HopRecord& h : trace.hops) {
    out << "hop," << h.index << ',' << h.from << ',' << h.to << ',' << h.delay << ','
        << h.tx_energy << ',' << h.rx_energy << ',' << (h.attacked ? 1 : 0) << '\n';
  }
  for (const RerouteEvent& e : trace.reroutes) {
    out << "reroute," << e.hop_index << ',' << e.attacked_node << ',' << e.proc_delay << ','
        << e.resp_delay << ',' << (e.rescreened ? 1 : 0) << '\n';
  }
  out << "summary," << (trace.success ? 1 : 0) << ',' << trace.total_delay << ','
      << trace.total_energy << ',' << trace.reroute_count << '\n';
}

inline std::string trace_to_string(const EpisodeTrace& trace) {
  std::ostringstream out;
  write_trace(trace, out);
  return out.str();
}

struct NeighborSlot {
  int node = -1;
  double sd = 0.0;
  double delay_norm = 0.0;
  double energy_norm = 0.0;
  double dist_norm = 0.0;
  bool valid = false;
};

// Per-step observation: own and destination positions plus a fixed-width
// array of neighbor feature slots. Slots that carry no valid action are
// all-zero sentinels.
struct EnvState {
  Vec2 current_pos_norm;
  Vec2 dest_pos_norm;
  std::vector<NeighborSlot> slots;

  int valid_count() const {
    int n = 0;
    for (const auto& s : slots) n += s.valid ? 1 : 0;
    return n;
  }

  std::vector<std::uint8_t> mask() const {
    std::vector<std::uint8_t> m(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) m[i] = slots[i].valid ? 1 : 0;
    return m;
  }

  std::vector<double> features() const {
    std::vector<double> f;
    f.reserve(4 + 4 * slots.size());
    f.push_back(current_pos_norm.x);
    f.push_back(current_pos_norm.y);
    f.push_back(dest_pos_norm.x);
    f.push_back(dest_pos_norm.y);
    for (const auto& s : slots) {
      if (s.valid) {
        f.push_back(s.sd);
        f.push_back(s.delay_norm);
        f.push_back(s.energy_norm);
        f.push_back(s.dist_norm);
      } else {
        f.insert(f.end(), {0.0, 0.0, 0.0, 0.0});
      }
    }
    return f;
  }
};

// Episodic single-packet delivery environment. Each episode starts from a fresh trust
// state from the priors, fresh ledger, fresh batteries, and a hidden attack
// set sampled from the seed. Attacks are discovered on arrival; detection
// rolls the packet back to the sender, charges the controller round trip,
// prunes the attacked node and (if the screened subgraph went dead)
// re-screens from the current position.
class RoutingEnv {
 public:
  struct StepInfo {
    bool reroute = false;
    int attacked_node = -1;
    bool rescreened = false;
  };

  struct StepResult {
    EnvState state;
    double reward = 0.0;
    bool done = false;
    Outcome outcome = Outcome::InProgress;
    StepInfo info;
  };

  RoutingEnv(const NetworkGraph& graph, const ChannelParams& channel, const SdnConfig& sdn,
             const TrustParams& trust_priors, AttackConfig attack, EnvConfig config, int source,
             const ScreenedSubgraph* subgraph)
      : graph_(graph),
        channel_(channel),
        sdn_(sdn),
        priors_(trust_priors),
        attack_(attack),
        config_(config),
        source_(source) {
    channel_.validate();
    sdn_.validate();
    config_.screening.validate();
    if (source_ < 0 || source_ >= graph_.node_count() || source_ == graph_.destination) {
      throw std::invalid_argument("RoutingEnv: invalid source node");
    }
    const int eligible = graph_.node_count() - 2;  // neither source nor destination
    if (attack_.n_attacked < 0 || attack_.n_attacked > eligible) {
      throw std::invalid_argument("RoutingEnv: n_attacked outside [0, N-2]");
    }
    if (attack_.reroute_limit < 0) {
      throw std::invalid_argument("RoutingEnv: reroute_limit must be non-negative");
    }
    if (config_.use_subgraph) {
      if (subgraph == nullptr || subgraph->paths.empty()) {
        throw ContractViolation("RoutingEnv: subgraph with at least one complete path required");
      }
      if (subgraph->source != source_ || subgraph->destination != graph_.destination) {
        throw ContractViolation("RoutingEnv: subgraph endpoints do not match the environment");
      }
      pristine_sub_ = *subgraph;
    }
    pad_width_ = graph_.max_degree();
    compute_full_graph_bounds();
  }

  int observation_size() const { return 4 + 4 * pad_width_; }
  int action_slots() const { return pad_width_; }
  int source() const { return source_; }
  int destination() const { return graph_.destination; }
  const NetworkGraph& graph() const { return graph_; }

  EnvState reset(std::uint64_t seed) {
    trust_ = TrustState(graph_.node_count(), priors_);
    ledger_.clear();
    residual_.resize(graph_.nodes.size());
    consumed_.assign(graph_.nodes.size(), 0.0);
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
      residual_[i] = graph_.nodes[i].residual_energy;
    }

    attacked_.assign(graph_.nodes.size(), false);
    detected_.assign(graph_.nodes.size(), false);
    if (attack_.n_attacked > 0) {
      std::vector<int> eligible;
      for (int id = 0; id < graph_.node_count(); ++id) {
        if (id != source_ && id != graph_.destination) eligible.push_back(id);
      }
      Rng rng(seed);
      rng.shuffle(eligible);
      for (int k = 0; k < attack_.n_attacked; ++k) attacked_[eligible[k]] = true;
    }

    current_ = source_;
    step_count_ = 0;
    terminal_ = false;

    trace_ = EpisodeTrace{};
    trace_.source = source_;
    trace_.destination = graph_.destination;
    trace_.request_delay = sdn_request_delay(graph_, sdn_, source_);
    trace_.process_delay = sdn_process_delay(graph_, sdn_);
    trace_.response_delay = sdn_response_delay(sdn_);
    trace_.total_delay += trace_.request_delay;
    trace_.total_delay += trace_.process_delay;
    trace_.total_delay += trace_.response_delay;
    trace_.eted_segments.assign(1, 0.0);

    if (config_.use_subgraph) {
      active_sub_ = pristine_sub_;
      delay_lo_ = active_sub_.delay_min;
      delay_hi_ = active_sub_.delay_max;
      energy_lo_ = active_sub_.energy_min;
      energy_hi_ = active_sub_.energy_max;
    } else {
      delay_lo_ = full_delay_min_;
      delay_hi_ = full_delay_max_;
      energy_lo_ = full_energy_min_;
      energy_hi_ = full_energy_max_;
    }

    EnvState state = make_state();
    if (state.valid_count() == 0) {
      throw InfeasibleError("RoutingEnv: no feasible first hop from the source");
    }
    return state;
  }

  StepResult step(int slot) {
    if (terminal_) throw ContractViolation("RoutingEnv::step: episode already terminal");
    const EnvState before = make_state();
    if (slot < 0 || slot >= static_cast<int>(before.slots.size()) || !before.slots[slot].valid) {
      throw ContractViolation("RoutingEnv::step: action violates the mask");
    }

    const int u = current_;
    const int v = before.slots[slot].node;

    const double delay = edge_delay(graph_, channel_, u, v, config_.payload_bits);
    const HopEnergy energy = hop_energy(config_.payload_bits, channel_);
    residual_[u] -= energy.tx;
    residual_[v] -= energy.rx;
    consumed_[u] += energy.tx;
    consumed_[v] += energy.rx;
    trace_.total_energy += energy.tx + energy.rx;
    trace_.total_delay += delay;

    const int hop_index = static_cast<int>(trace_.hops.size()) + 1;
    const bool into_destination = (v == graph_.destination);
    const bool attack_hit = !into_destination && attacked_[v];
    trace_.hops.push_back({hop_index, u, v, delay, energy.tx, energy.rx, attack_hit});

    const double reward = hop_reward(delay, energy.tx + energy.rx);
    trace_.reward_sum += reward;

    StepResult result;
    result.reward = reward;

    if (into_destination) {
      trace_.dest_delay = delay;
      finish(Outcome::Delivered);
    } else {
      trace_.eted_segments.back() += delay;
      ledger_.append(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(hop_index),
                     attack_hit, trace_.total_delay);
      trust_.record_auth(v, attack_hit);

      if (attack_hit) {
        detected_[v] = true;
        result.info.reroute = true;
        result.info.attacked_node = v;
        ++trace_.reroute_count;
        if (trace_.reroute_count > attack_.reroute_limit) {
          --trace_.reroute_count;  // the reroute was refused, not performed
          finish(Outcome::RerouteLimitExceeded);
        } else {
          result.info.rescreened = perform_reroute(hop_index, v);
        }
      } else {
        current_ = v;
      }
    }

    ++step_count_;
    if (!terminal_ && step_count_ >= config_.max_hops) {
      finish(Outcome::HopBudgetExhausted);
    }

    if (!terminal_) {
      result.state = make_state();
      if (result.state.valid_count() == 0) {
        finish(Outcome::NoPath);
      }
    }
    if (terminal_) {
      result.state = terminal_state();
    }

    result.done = terminal_;
    result.outcome = trace_.outcome;
    return result;
  }

  // Copies the finished episode's accounting into a trainer-side stat row.
  template <typename Stat>
  void fill_stat(Stat& stat) const {
    stat.success = trace_.success;
    stat.delay = trace_.total_delay;
    stat.energy = trace_.total_energy;
    stat.reroutes = trace_.reroute_count;
    stat.outcome = trace_.outcome;
  }

  const EpisodeTrace& trace() const { return trace_; }
  const Ledger& ledger() const { return ledger_; }
  const TrustState& trust() const { return trust_; }
  const std::vector<double>& residual_energy() const { return residual_; }
  const std::vector<double>& consumed_energy() const { return consumed_; }
  const std::vector<bool>& attacked_nodes() const { return attacked_; }
  const std::vector<bool>& detected_nodes() const { return detected_; }
  const ScreenedSubgraph& active_subgraph() const { return active_sub_; }
  int current_node() const { return current_; }
  bool done() const { return terminal_; }

 private:
  void compute_full_graph_bounds() {
    full_delay_min_ = full_energy_min_ = 1e300;
    full_delay_max_ = full_energy_max_ = -1e300;
    for (int u = 0; u < graph_.node_count(); ++u) {
      for (int v : graph_.neighbors(u)) {
        const double t = edge_delay(graph_, channel_, u, v, config_.payload_bits);
        const double e = edge_energy(channel_, config_.payload_bits);
        full_delay_min_ = std::min(full_delay_min_, t);
        full_delay_max_ = std::max(full_delay_max_, t);
        full_energy_min_ = std::min(full_energy_min_, e);
        full_energy_max_ = std::max(full_energy_max_, e);
      }
    }
  }

  static double min_max_norm(double x, double lo, double hi) {
    if (hi <= lo) return 0.0;  // degenerate range: the term drops out
    return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  }

  double hop_reward(double delay, double energy) const {
    const double t = min_max_norm(delay, delay_lo_, delay_hi_);
    const double e = min_max_norm(energy, energy_lo_, energy_hi_);
    return -(config_.lambda_r * t + (1.0 - config_.lambda_r) * e);
  }

  void finish(Outcome outcome) {
    terminal_ = true;
    trace_.outcome = outcome;
    trace_.success = (outcome == Outcome::Delivered);
  }

  // Controller round trip after a detection; the packet stays cached at the
  // sender. Returns true when the pruned subgraph could no longer carry the
  // packet and a full re-screen ran.
  bool perform_reroute(int hop_index, int attacked_node) {
    const double proc = sdn_process_delay(graph_, sdn_);
    const double resp = sdn_response_delay(sdn_);
    trace_.total_delay += proc;
    trace_.total_delay += resp;
    trace_.eted_segments.push_back(0.0);

    bool rescreened = false;
    if (config_.use_subgraph) {
      active_sub_ = prune_subgraph(active_sub_, graph_, channel_, detected_);
      if (active_sub_.paths.empty() || !active_sub_.reachable(current_)) {
        rescreened = true;
        try {
          active_sub_ = beam_search(graph_, trust_, channel_, config_.screening, current_,
                                    graph_.destination, config_.payload_bits, detected_);
        } catch (const InfeasibleError&) {
          finish(Outcome::NoPath);
        }
      }
    }
    trace_.reroutes.push_back({hop_index, attacked_node, proc, resp, rescreened});
    return rescreened;
  }

  bool action_valid(int u, int v) const {
    if (detected_[v]) return false;
    const double d = distance(graph_.nodes[u], graph_.nodes[v]);
    if (snr(channel_, path_loss_db(d, channel_.frequency)).db < channel_.snr_min_db) return false;
    const HopEnergy energy = hop_energy(config_.payload_bits, channel_);
    if (residual_[u] < energy.tx || residual_[v] < energy.rx) return false;
    if (v != graph_.destination) {
      if (config_.enforce_sd && trust_.security_degree(graph_, v) < config_.screening.theta_sd) {
        return false;
      }
      if (residual_[v] < config_.screening.energy_threshold) return false;
    }
    return true;
  }

  EnvState make_state() const {
    EnvState state;
    const double m = graph_.area_size;
    const double diag = m * std::numbers::sqrt2;
    state.current_pos_norm = {graph_.nodes[current_].pos.x / m, graph_.nodes[current_].pos.y / m};
    state.dest_pos_norm = {graph_.nodes[graph_.destination].pos.x / m,
                           graph_.nodes[graph_.destination].pos.y / m};
    state.slots.assign(pad_width_, NeighborSlot{});

    const std::vector<int> candidates =
        config_.use_subgraph ? active_sub_.successors(current_) : graph_.neighbors(current_);
    for (std::size_t i = 0; i < candidates.size() && i < state.slots.size(); ++i) {
      const int v = candidates[i];
      NeighborSlot& slot = state.slots[i];
      slot.node = v;
      slot.valid = action_valid(current_, v);
      if (slot.valid) {
        slot.sd = trust_.security_degree(graph_, v);
        slot.delay_norm = min_max_norm(edge_delay(graph_, channel_, current_, v, config_.payload_bits),
                                       delay_lo_, delay_hi_);
        slot.energy_norm =
            min_max_norm(edge_energy(channel_, config_.payload_bits), energy_lo_, energy_hi_);
        slot.dist_norm =
            distance(graph_.nodes[v].pos, graph_.nodes[graph_.destination].pos) / diag;
      }
    }
    return state;
  }

  EnvState terminal_state() const {
    EnvState state = make_state();
    for (auto& slot : state.slots) {
      slot = NeighborSlot{};
    }
    return state;
  }

  const NetworkGraph& graph_;
  ChannelParams channel_;
  SdnConfig sdn_;
  TrustParams priors_;
  AttackConfig attack_;
  EnvConfig config_;
  int source_;
  int pad_width_ = 0;

  ScreenedSubgraph pristine_sub_;
  double full_delay_min_ = 0, full_delay_max_ = 0;
  double full_energy_min_ = 0, full_energy_max_ = 0;

  // episode state
  TrustState trust_;
  Ledger ledger_;
  std::vector<double> residual_;
  std::vector<double> consumed_;
  std::vector<bool> attacked_;
  std::vector<bool> detected_;
  ScreenedSubgraph active_sub_;
  double delay_lo_ = 0, delay_hi_ = 0, energy_lo_ = 0, energy_hi_ = 0;
  int current_ = -1;
  int step_count_ = 0;
  bool terminal_ = true;
  EpisodeTrace trace_;
};

}  // namespace skyrelay
