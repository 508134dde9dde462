#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "skyrelay/mlp.hpp"
#include "skyrelay/policy.hpp"
#include "skyrelay/rollout.hpp"
#include "skyrelay/rng.hpp"
#include "skyrelay/sim_env.hpp"

namespace skyrelay {

struct TrainConfig {
  double learning_rate = 5e-4;
  double clip_epsilon = 0.1;
  double grad_clip_norm = 0.15;
  int rollout_steps = 2048;
  int minibatch_size = 64;
  int epochs_per_update = 4;
  double discount = 0.99;
  double gae_lambda = 0.95;
  int episodes = 600;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  bool clip_enabled = true;  // false: plain policy-gradient surrogate
  std::uint64_t seed = 1;

  void validate() const {
    if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0) {
      throw std::invalid_argument("TrainConfig: clip_epsilon outside (0,1)");
    }
    if (discount <= 0.0 || discount > 1.0) {
      throw std::invalid_argument("TrainConfig: discount outside (0,1]");
    }
    if (gae_lambda < 0.0 || gae_lambda > 1.0) {
      throw std::invalid_argument("TrainConfig: gae_lambda outside [0,1]");
    }
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate <= 0");
    if (rollout_steps < 1 || minibatch_size < 1 || epochs_per_update < 1 || episodes < 1) {
      throw std::invalid_argument("TrainConfig: counts must be positive");
    }
  }
};

// Single-sample clipped surrogate objective min(r*A, clip(r,1-eps,1+eps)*A)
// with r = exp(logp_new - logp_old).
inline double clipped_objective(double log_prob_new, double log_prob_old, double advantage,
                                double epsilon) {
  const double ratio = std::exp(log_prob_new - log_prob_old);
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

// Batch loss: negative mean of the clipped objective.
inline double clipped_loss(const std::vector<double>& log_probs_new,
                           const std::vector<double>& log_probs_old,
                           const std::vector<double>& advantages, double epsilon) {
  if (log_probs_new.size() != log_probs_old.size() ||
      log_probs_new.size() != advantages.size() || log_probs_new.empty()) {
    throw std::invalid_argument("clipped_loss: batch size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < log_probs_new.size(); ++i) {
    sum += clipped_objective(log_probs_new[i], log_probs_old[i], advantages[i], epsilon);
  }
  return -sum / static_cast<double>(log_probs_new.size());
}

struct EpisodeStat {
  int episode = 0;
  double reward = 0.0;
  bool success = false;
  double delay = 0.0;
  double energy = 0.0;
  int reroutes = 0;
  Outcome outcome = Outcome::InProgress;
};

struct TrainResult {
  std::vector<EpisodeStat> curve;
};

// Combined loss and analytic gradient of one minibatch: clipped (or plain)
// policy surrogate + value_coef * MSE(value, return) - entropy_coef * mean
// entropy. Gradients are accumulated into the two flat vectors, which must
// arrive zeroed. Returns the scalar loss the gradients differentiate, so a
// finite-difference check can run against this exact function.
inline double ppo_loss_and_grad(PolicyNet& policy, const RolloutBuffer& buffer,
                                const std::vector<int>& indices, const TrainConfig& config,
                                std::vector<double>& actor_grad,
                                std::vector<double>& critic_grad) {
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  double loss = 0.0;
  std::vector<double> dlogits;
  for (int i : indices) {
    const auto& obs = buffer.observation(i);
    const auto& mask = buffer.mask(i);
    const int action = buffer.action(i);
    const double advantage = buffer.advantage(i);

    const auto& logits = policy.actor().forward(obs);
    const MaskedCategorical dist = MaskedCategorical::from_logits(logits, mask);
    const double log_prob_new = dist.log_probs[action];
    const double ratio = std::exp(log_prob_new - buffer.log_prob(i));

    double objective;
    double dobjective_dlogp;  // flows through r: dr/dlogp = r
    if (config.clip_enabled) {
      const double clipped =
          std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) * advantage;
      const double unclipped = ratio * advantage;
      objective = std::min(unclipped, clipped);
      dobjective_dlogp = (unclipped <= clipped) ? ratio * advantage : 0.0;
    } else {
      objective = ratio * advantage;
      dobjective_dlogp = ratio * advantage;
    }
    const double entropy = dist.entropy();
    loss += (-objective - config.entropy_coef * entropy) * inv_n;

    dlogits.assign(logits.size(), 0.0);
    for (std::size_t k = 0; k < logits.size(); ++k) {
      if (!mask[k]) continue;
      const double p = dist.probs[k];
      const double indicator = (static_cast<int>(k) == action) ? 1.0 : 0.0;
      // policy term: d(-objective)/dz_k
      dlogits[k] = -dobjective_dlogp * (indicator - p) * inv_n;
      // entropy bonus: d(-entropy_coef * H)/dz_k with dH/dz_k = -p(log p + H)
      dlogits[k] += config.entropy_coef * p * (dist.log_probs[k] + entropy) * inv_n;
    }
    policy.actor().backward(dlogits, actor_grad);

    const double value = policy.critic().forward(obs)[0];
    const double err = value - buffer.return_value(i);
    loss += config.value_coef * err * err * inv_n;
    const std::vector<double> dvalue{config.value_coef * 2.0 * err * inv_n};
    policy.critic().backward(dvalue, critic_grad);
  }
  return loss;
}

// Clipped-surrogate policy optimization over a gym-style environment.
// Env must provide observation_size(), action_slots(), reset(seed) ->
// EnvState, step(action) -> RoutingEnv::StepResult-like, and
// fill_stat(EpisodeStat&).
template <typename Env>
class PpoTrainer {
 public:
  PpoTrainer(Env& env, const TrainConfig& config)
      : env_(env),
        config_(config),
        policy_(env.observation_size(), env.action_slots(), {64, 64}, mix_seed(config.seed, 7)),
        actor_adam_(policy_.actor().param_count(), config.learning_rate),
        critic_adam_(policy_.critic().param_count(), config.learning_rate),
        rng_(mix_seed(config.seed, 11)) {
    config_.validate();
  }

  PolicyNet& policy() { return policy_; }
  const TrainConfig& config() const { return config_; }

  TrainResult train() {
    TrainResult result;
    int episodes_done = 0;
    std::uint64_t episode_seq = 0;
    EnvState obs = env_.reset(episode_seed(episode_seq++));
    double episode_reward = 0.0;
    RolloutBuffer buffer;

    while (episodes_done < config_.episodes) {
      buffer.clear();
      bool last_done = false;
      for (int t = 0; t < config_.rollout_steps; ++t) {
        const std::vector<double> features = obs.features();
        const std::vector<std::uint8_t> mask = obs.mask();
        const PolicyNet::Sample sample = policy_.sample_action(features, mask, rng_);
        const double value = policy_.value(features);
        const auto step = env_.step(sample.action);
        buffer.push(features, mask, sample.action, sample.log_prob, step.reward, value,
                    step.done);
        episode_reward += step.reward;
        last_done = step.done;
        if (step.done) {
          EpisodeStat stat;
          stat.episode = episodes_done;
          stat.reward = episode_reward;
          env_.fill_stat(stat);
          result.curve.push_back(stat);
          episode_reward = 0.0;
          ++episodes_done;
          if (episodes_done >= config_.episodes) break;
          obs = env_.reset(episode_seed(episode_seq++));
        } else {
          obs = step.state;
        }
      }
      if (buffer.size() < config_.rollout_steps) break;  // episode budget hit mid-rollout
      const double bootstrap = last_done ? 0.0 : policy_.value(obs.features());
      buffer.finalize(config_.discount, config_.gae_lambda, bootstrap);
      buffer.normalize_advantages();
      update(buffer);
    }
    return result;
  }

 private:
  std::uint64_t episode_seed(std::uint64_t k) const { return mix_seed(config_.seed, 1000 + k); }

  void update(const RolloutBuffer& buffer) {
    const int n = buffer.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> actor_grad(policy_.actor().param_count());
    std::vector<double> critic_grad(policy_.critic().param_count());

    for (int epoch = 0; epoch < config_.epochs_per_update; ++epoch) {
      rng_.shuffle(order);
      for (int start = 0; start < n; start += config_.minibatch_size) {
        const int end = std::min(n, start + config_.minibatch_size);
        const std::vector<int> minibatch(order.begin() + start, order.begin() + end);
        std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
        std::fill(critic_grad.begin(), critic_grad.end(), 0.0);
        ppo_loss_and_grad(policy_, buffer, minibatch, config_, actor_grad, critic_grad);
        clip_grad_norm({&actor_grad, &critic_grad}, config_.grad_clip_norm);
        actor_adam_.step(policy_.actor().params(), actor_grad);
        critic_adam_.step(policy_.critic().params(), critic_grad);
      }
    }
  }

  Env& env_;
  TrainConfig config_;
  PolicyNet policy_;
  Adam actor_adam_;
  Adam critic_adam_;
  Rng rng_;
};

}  // namespace skyrelay
