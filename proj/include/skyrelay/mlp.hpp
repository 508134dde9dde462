#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "skyrelay/rng.hpp"

namespace skyrelay {

// Dense feed-forward network: tanh hidden layers, linear output, parameters
// in one flat vector (per layer: row-major weights, then biases). Forward
// caches activations for the matching backward call.
class Mlp {
 public:
  Mlp(std::vector<int> layer_sizes, double output_scale, Rng& rng)
      : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need input and output layer");
    int count = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(count);
      count += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    params_.resize(count);
    acts_.resize(sizes_.size());
    for (std::size_t l = 0; l < sizes_.size(); ++l) acts_[l].resize(sizes_[l]);

    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int fan_in = sizes_[l];
      const int fan_out = sizes_[l + 1];
      const bool last = (l + 2 == sizes_.size());
      const double limit =
          std::sqrt(6.0 / (fan_in + fan_out)) * (last ? output_scale : 1.0);
      double* w = params_.data() + offsets_[l];
      for (int i = 0; i < fan_in * fan_out; ++i) w[i] = rng.uniform(-limit, limit);
      // biases start at zero
    }
  }

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int param_count() const { return static_cast<int>(params_.size()); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  const std::vector<double>& forward(const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != sizes_.front()) {
      throw std::invalid_argument("Mlp::forward: input size mismatch");
    }
    acts_[0] = input;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + in * out;
      const bool last = (l + 2 == sizes_.size());
      for (int o = 0; o < out; ++o) {
        double z = b[o];
        const double* row = w + o * in;
        for (int i = 0; i < in; ++i) z += row[i] * acts_[l][i];
        acts_[l + 1][o] = last ? z : std::tanh(z);
      }
    }
    return acts_.back();
  }

  // Accumulates dL/dparams into grad given dL/doutput; requires the
  // activations of the preceding forward call.
  void backward(const std::vector<double>& dout, std::vector<double>& grad) const {
    if (grad.size() != params_.size()) {
      throw std::invalid_argument("Mlp::backward: grad size mismatch");
    }
    std::vector<double> delta = dout;
    for (std::size_t lp = sizes_.size() - 1; lp >= 1; --lp) {
      const std::size_t l = lp - 1;  // weight block between layers l and l+1
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + in * out;
      std::vector<double> dprev(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double d = delta[o];
        gb[o] += d;
        const double* row = w + o * in;
        double* grow = gw + o * in;
        for (int i = 0; i < in; ++i) {
          grow[i] += d * acts_[l][i];
          dprev[i] += d * row[i];
        }
      }
      if (l >= 1) {  // tanh derivative through the hidden activation
        for (int i = 0; i < in; ++i) dprev[i] *= 1.0 - acts_[l][i] * acts_[l][i];
      }
      delta = std::move(dprev);
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  std::vector<double> params_;
  std::vector<std::vector<double>> acts_;
};

// Adam with bias correction; one instance per parameter vector.
class Adam {
 public:
  Adam(int param_count, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
        m_(param_count, 0.0), v_(param_count, 0.0) {}

  void set_learning_rate(double lr) { lr_ = lr; }

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

// Scales the stacked gradient vectors so their joint L2 norm does not
// exceed max_norm; returns the pre-clip norm.
inline double clip_grad_norm(std::vector<std::vector<double>*> grads, double max_norm) {
  double sq = 0.0;
  for (const auto* g : grads) {
    for (double x : *g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto* g : grads) {
      for (double& x : *g) x *= scale;
    }
  }
  return norm;
}

}  // namespace skyrelay
