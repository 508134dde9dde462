#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "skyrelay/ppo.hpp"
#include "skyrelay/rng.hpp"
#include "skyrelay/sim_env.hpp"

namespace skyrelay {

// The actor-critic baseline is the same trainer with the clipping disabled
// and a single pass over each batch.
inline TrainConfig a2c_variant(TrainConfig config) {
  config.clip_enabled = false;
  config.epochs_per_update = 1;
  return config;
}

struct QlConfig {
  double learning_rate = 0.1;
  double discount = 0.99;
  double epsilon = 0.1;  // exploration rate
  int episodes = 600;
  std::uint64_t seed = 1;

  void validate() const {
    if (learning_rate <= 0.0 || learning_rate > 1.0) {
      throw std::invalid_argument("QlConfig: learning_rate outside (0,1]");
    }
    if (discount < 0.0 || discount > 1.0) {
      throw std::invalid_argument("QlConfig: discount outside [0,1]");
    }
    if (epsilon < 0.0 || epsilon > 1.0) {
      throw std::invalid_argument("QlConfig: epsilon outside [0,1]");
    }
    if (episodes < 1) throw std::invalid_argument("QlConfig: episodes < 1");
  }
};

// Tabular Q-learning over (current node, neighbor slot) with epsilon-greedy
// exploration. The state is the discrete node id, so the table ignores the
// trust/energy features entirely.
class BsqlAgent {
 public:
  BsqlAgent(int node_count, int action_slots)
      : q_(node_count, std::vector<double>(action_slots, 0.0)) {}

  int action_slots() const { return q_.empty() ? 0 : static_cast<int>(q_[0].size()); }
  double q(int node, int slot) const { return q_[node][slot]; }

  int greedy(int node, const std::vector<std::uint8_t>& mask) const {
    int best = -1;
    double best_q = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
      if (!mask[k]) continue;
      if (best < 0 || q_[node][k] > best_q) {
        best = static_cast<int>(k);
        best_q = q_[node][k];
      }
    }
    if (best < 0) throw ContractViolation("BsqlAgent::greedy: all actions masked");
    return best;
  }

  template <typename Env>
  TrainResult train(Env& env, const QlConfig& config) {
    config.validate();
    Rng rng(mix_seed(config.seed, 13));
    TrainResult result;
    for (int episode = 0; episode < config.episodes; ++episode) {
      EnvState obs = env.reset(mix_seed(config.seed, 1000 + episode));
      double episode_reward = 0.0;
      bool done = false;
      while (!done) {
        const int node = env.current_node();
        const std::vector<std::uint8_t> mask = obs.mask();
        const int action = (rng.uniform() < config.epsilon) ? explore(mask, rng)
                                                            : greedy(node, mask);
        const auto step = env.step(action);
        episode_reward += step.reward;
        double target = step.reward;
        if (!step.done) {
          const int next = env.current_node();
          const std::vector<std::uint8_t> next_mask = step.state.mask();
          double best_next = 0.0;
          bool any = false;
          for (std::size_t k = 0; k < next_mask.size(); ++k) {
            if (!next_mask[k]) continue;
            if (!any || q_[next][k] > best_next) {
              best_next = q_[next][k];
              any = true;
            }
          }
          target += config.discount * (any ? best_next : 0.0);
        }
        q_[node][action] += config.learning_rate * (target - q_[node][action]);
        done = step.done;
        obs = step.state;
      }
      EpisodeStat stat;
      stat.episode = episode;
      stat.reward = episode_reward;
      env.fill_stat(stat);
      result.curve.push_back(stat);
    }
    return result;
  }

  void save(std::ostream& out) const {
    out.precision(17);
    out << "qtable " << q_.size() << ' ' << action_slots() << '\n';
    for (const auto& row : q_) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k];
      out << '\n';
    }
  }

  void load(std::istream& in) {
    std::string tag;
    std::size_t nodes = 0, slots = 0;
    in >> tag >> nodes >> slots;
    if (tag != "qtable" || nodes != q_.size() ||
        slots != static_cast<std::size_t>(action_slots())) {
      throw std::invalid_argument("BsqlAgent::load: table shape mismatch");
    }
    for (auto& row : q_) {
      for (double& v : row) in >> v;
    }
    if (!in) throw std::invalid_argument("BsqlAgent::load: truncated table");
  }

 private:
  static int explore(const std::vector<std::uint8_t>& mask, Rng& rng) {
    std::vector<int> valid;
    for (std::size_t k = 0; k < mask.size(); ++k) {
      if (mask[k]) valid.push_back(static_cast<int>(k));
    }
    if (valid.empty()) throw ContractViolation("BsqlAgent: all actions masked");
    return valid[rng.below(valid.size())];
  }

  std::vector<std::vector<double>> q_;
};

}  // namespace skyrelay
