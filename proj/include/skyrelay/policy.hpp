#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "skyrelay/mlp.hpp"
#include "skyrelay/net_model.hpp"
#include "skyrelay/rng.hpp"

namespace skyrelay {

// Categorical distribution over action slots with hard masking: invalid
// slots carry probability exactly zero and never sample.
struct MaskedCategorical {
  std::vector<double> probs;
  std::vector<double> log_probs;  // -inf on invalid slots

  static MaskedCategorical from_logits(const std::vector<double>& logits,
                                       const std::vector<std::uint8_t>& mask) {
    if (logits.size() != mask.size()) {
      throw std::invalid_argument("MaskedCategorical: logits/mask size mismatch");
    }
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (mask[i] && logits[i] > max_logit) max_logit = logits[i];
    }
    if (max_logit == -std::numeric_limits<double>::infinity()) {
      throw ContractViolation("MaskedCategorical: all actions masked");
    }
    MaskedCategorical dist;
    dist.probs.assign(logits.size(), 0.0);
    dist.log_probs.assign(logits.size(), -std::numeric_limits<double>::infinity());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (mask[i]) {
        dist.probs[i] = std::exp(logits[i] - max_logit);
        sum += dist.probs[i];
      }
    }
    const double log_sum = std::log(sum);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (mask[i]) {
        dist.probs[i] /= sum;
        dist.log_probs[i] = logits[i] - max_logit - log_sum;
      }
    }
    return dist;
  }

  int sample(Rng& rng) const {
    const double u = rng.uniform();
    double cumulative = 0.0;
    int last_valid = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      last_valid = static_cast<int>(i);
      cumulative += probs[i];
      if (u < cumulative) return last_valid;
    }
    return last_valid;  // rounding fell off the end of the CDF
  }

  int argmax() const {
    int best = -1;
    double best_p = -1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > best_p) {
        best_p = probs[i];
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  double entropy() const {
    double h = 0.0;
    for (double p : probs) {
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  }
};

// Actor-critic pair over flat observations. The actor emits one logit per
// neighbor slot; the critic a scalar value. The small output scale keeps the
// initial policy near uniform over the valid slots.
class PolicyNet {
 public:
  PolicyNet(int observation_size, int action_slots, const std::vector<int>& hidden,
            std::uint64_t seed)
      : actor_(build(observation_size, hidden, action_slots, 0.01, seed, 0)),
        critic_(build(observation_size, hidden, 1, 1.0, seed, 1)) {}

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  int param_count() const { return actor_.param_count() + critic_.param_count(); }

  struct Sample {
    int action = -1;
    double log_prob = 0.0;
  };

  Sample sample_action(const std::vector<double>& obs, const std::vector<std::uint8_t>& mask,
                       Rng& rng) {
    const auto dist = MaskedCategorical::from_logits(actor_.forward(obs), mask);
    const int a = dist.sample(rng);
    return {a, dist.log_probs[a]};
  }

  int greedy_action(const std::vector<double>& obs, const std::vector<std::uint8_t>& mask) {
    return MaskedCategorical::from_logits(actor_.forward(obs), mask).argmax();
  }

  double value(const std::vector<double>& obs) { return critic_.forward(obs)[0]; }

  void save(std::ostream& out) const {
    out.precision(17);
    out << "actor " << actor_.param_count() << '\n';
    for (double p : actor_.params()) out << p << '\n';
    out << "critic " << critic_.param_count() << '\n';
    for (double p : critic_.params()) out << p << '\n';
  }

  void load(std::istream& in) {
    std::string tag;
    int count = 0;
    in >> tag >> count;
    if (tag != "actor" || count != actor_.param_count()) {
      throw std::invalid_argument("PolicyNet::load: actor block mismatch");
    }
    for (double& p : actor_.params()) in >> p;
    in >> tag >> count;
    if (tag != "critic" || count != critic_.param_count()) {
      throw std::invalid_argument("PolicyNet::load: critic block mismatch");
    }
    for (double& p : critic_.params()) in >> p;
    if (!in) throw std::invalid_argument("PolicyNet::load: truncated parameter dump");
  }

 private:
  static Mlp build(int input, const std::vector<int>& hidden, int output, double scale,
                   std::uint64_t seed, std::uint64_t salt) {
    std::vector<int> sizes{input};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(output);
    Rng rng(mix_seed(seed, 101 + salt));
    return Mlp(sizes, scale, rng);
  }

  Mlp actor_;
  Mlp critic_;
};

}  // namespace skyrelay
