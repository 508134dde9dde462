#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace skyrelay {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one collected rollout.
//   delta_t = r_t + discount * V(s_{t+1}) * (1 - done_t) - V(s_t)
//   A_t     = delta_t + discount * lambda * (1 - done_t) * A_{t+1}
// The value after the final stored step is `bootstrap_value` (0 whenever
// that step ended its episode). Returns are A + V.
inline GaeResult gae_advantages(const std::vector<double>& rewards,
                                const std::vector<double>& values,
                                const std::vector<std::uint8_t>& dones, double discount,
                                double gae_lambda, double bootstrap_value) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("gae_advantages: input length mismatch");
  }
  if (n == 0) throw std::invalid_argument("gae_advantages: empty rollout");
  GaeResult result;
  result.advantages.resize(n);
  result.returns.resize(n);
  double carry = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double next_value = (t + 1 < n) ? values[t + 1] : bootstrap_value;
    const double delta = rewards[t] + discount * next_value * not_done - values[t];
    carry = delta + discount * gae_lambda * not_done * carry;
    result.advantages[t] = carry;
    result.returns[t] = carry + values[t];
  }
  return result;
}

// Per-step storage for on-policy updates. Masks are kept because the new
// log-probabilities must be evaluated under the same masked distribution
// that generated the actions.
class RolloutBuffer {
 public:
  void clear() {
    observations_.clear();
    masks_.clear();
    actions_.clear();
    log_probs_.clear();
    rewards_.clear();
    values_.clear();
    dones_.clear();
    advantages_.clear();
    returns_.clear();
  }

  void push(std::vector<double> observation, std::vector<std::uint8_t> mask, int action,
            double log_prob, double reward, double value, bool done) {
    observations_.push_back(std::move(observation));
    masks_.push_back(std::move(mask));
    actions_.push_back(action);
    log_probs_.push_back(log_prob);
    rewards_.push_back(reward);
    values_.push_back(value);
    dones_.push_back(done ? 1 : 0);
  }

  int size() const { return static_cast<int>(actions_.size()); }

  void finalize(double discount, double gae_lambda, double bootstrap_value) {
    GaeResult gae = gae_advantages(rewards_, values_, dones_, discount, gae_lambda,
                                   bootstrap_value);
    advantages_ = std::move(gae.advantages);
    returns_ = std::move(gae.returns);
  }

  // Zero mean, unit variance over the whole batch; skipped for degenerate
  // spreads so a constant-advantage batch is not amplified into noise.
  void normalize_advantages() {
    const std::size_t n = advantages_.size();
    if (n == 0) return;
    double mean = 0.0;
    for (double a : advantages_) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages_) var += (a - mean) * (a - mean);
    const double std_dev = std::sqrt(var / static_cast<double>(n));
    if (std_dev < 1e-8) return;
    for (double& a : advantages_) a = (a - mean) / std_dev;
  }

  const std::vector<double>& observation(int i) const { return observations_[i]; }
  const std::vector<std::uint8_t>& mask(int i) const { return masks_[i]; }
  int action(int i) const { return actions_[i]; }
  double log_prob(int i) const { return log_probs_[i]; }
  double reward(int i) const { return rewards_[i]; }
  double value(int i) const { return values_[i]; }
  bool done(int i) const { return dones_[i] != 0; }
  double advantage(int i) const { return advantages_[i]; }
  double return_value(int i) const { return returns_[i]; }

 private:
  std::vector<std::vector<double>> observations_;
  std::vector<std::vector<std::uint8_t>> masks_;
  std::vector<int> actions_;
  std::vector<double> log_probs_;
  std::vector<double> rewards_;
  std::vector<double> values_;
  std::vector<std::uint8_t> dones_;
  std::vector<double> advantages_;
  std::vector<double> returns_;
};

}  // namespace skyrelay
