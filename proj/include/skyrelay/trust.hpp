#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "skyrelay/ledger.hpp"
#include "skyrelay/net_model.hpp"

namespace skyrelay {

struct TrustParams {
  double alpha = 0.5;             // weight of neighbor reliability in SD
  double beta = 0.2;              // reliability decline per detected attack
  double init_reliability = 0.9;  // RE at spawn
  std::uint32_t prior_successes = 1;  // keeps S/(S+F) defined from the start
  std::uint32_t prior_failures = 0;

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("TrustParams: alpha outside [0,1]");
    if (beta <= 0.0 || beta >= 1.0) throw std::invalid_argument("TrustParams: beta outside (0,1)");
    if (init_reliability < 0.0 || init_reliability > 1.0) {
      throw std::invalid_argument("TrustParams: init_reliability outside [0,1]");
    }
    if (prior_successes + prior_failures == 0) {
      throw std::invalid_argument("TrustParams: priors must contain at least one observation");
    }
  }
};

// Per-node trust bookkeeping: authentication counters, own reliability and
// the derived security degree. Queries recompute from current counters, so
// screening always sees post-attack values.
class TrustState {
 public:
  TrustState() = default;

  TrustState(int node_count, const TrustParams& params) : params_(params) {
    params_.validate();
    successes_.assign(node_count, params.prior_successes);
    failures_.assign(node_count, params.prior_failures);
    reliability_.assign(node_count, params.init_reliability);
  }

  int node_count() const { return static_cast<int>(successes_.size()); }
  const TrustParams& params() const { return params_; }

  std::uint32_t successes(int id) const { return successes_[id]; }
  std::uint32_t failures(int id) const { return failures_[id]; }
  double reliability(int id) const { return reliability_[id]; }

  // Historical credibility A = S / (S + F).
  double credibility(int id) const {
    return static_cast<double>(successes_[id]) /
           static_cast<double>(successes_[id] + failures_[id]);
  }

  // Applies one authentication outcome to the success/failure counters and
  // returns the updated credibility.
  double update_credibility(int id, bool delta_data) {
    if (delta_data) {
      ++failures_[id];
    } else {
      ++successes_[id];
    }
    return credibility(id);
  }

  // RE declines by beta per detected attack and never leaves [0,1].
  double update_reliability(int id, bool delta_data) {
    if (delta_data) {
      reliability_[id] = std::clamp(reliability_[id] - params_.beta, 0.0, 1.0);
    }
    return reliability_[id];
  }

  void record_auth(int id, bool delta_data) {
    update_credibility(id, delta_data);
    update_reliability(id, delta_data);
  }

  // Mean reliability over the node's graph neighbors.
  double neighbor_reliability(const NetworkGraph& graph, int id) const {
    const auto& neighbors = graph.neighbors(id);
    if (neighbors.empty()) {
      throw InfeasibleError("neighbor_reliability: node " + std::to_string(id) +
                            " is isolated");
    }
    double sum = 0.0;
    for (int j : neighbors) sum += reliability_[j];
    return sum / static_cast<double>(neighbors.size());
  }

  // SD = alpha * RE_avg + (1 - alpha) * A.
  double security_degree(const NetworkGraph& graph, int id) const {
    return params_.alpha * neighbor_reliability(graph, id) +
           (1.0 - params_.alpha) * credibility(id);
  }

  bool operator==(const TrustState& other) const {
    return successes_ == other.successes_ && failures_ == other.failures_ &&
           reliability_ == other.reliability_;
  }

 private:
  TrustParams params_;
  std::vector<std::uint32_t> successes_;
  std::vector<std::uint32_t> failures_;
  std::vector<double> reliability_;
};

// Replays a verified ledger from genesis; the result matches the
// incrementally maintained state record for record.
inline TrustState rebuild_trust_from_ledger(const Ledger& ledger, const NetworkGraph& graph,
                                            const TrustParams& params) {
  if (!ledger.verify()) {
    throw ContractViolation("rebuild_trust_from_ledger: ledger failed verification");
  }
  TrustState state(graph.node_count(), params);
  for (const auto& record : ledger.records()) {
    state.record_auth(static_cast<int>(record.uav_id), record.delta_data != 0);
  }
  return state;
}

}  // namespace skyrelay
