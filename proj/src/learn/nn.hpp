#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "model_state.hpp"

namespace fdbench::detail {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

/// Adam with the bias correction folded into the step size:
///   lr_t = lr * sqrt(1 - b2^t) / (1 - b1^t);  p -= lr_t * m / (sqrt(v) + eps)
class Adam {
 public:
  Adam(const Hyperparams& h, std::vector<ParamRef> params)
      : lr_(h.learning_rate), b1_(h.adam_beta1), b2_(h.adam_beta2), eps_(h.adam_epsilon),
        params_(std::move(params)) {
    for (const auto& p : params_) {
      m_.emplace_back(p.size, 0.0);
      v_.emplace_back(p.size, 0.0);
    }
  }

  void step() {
    ++t_;
    const double lr_t = lr_ * std::sqrt(1 - std::pow(b2_, t_)) / (1 - std::pow(b1_, t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const ParamRef& p = params_[k];
      double* m = m_[k].data();
      double* v = v_[k].data();
      for (std::size_t i = 0; i < p.size; ++i) {
        const double g = p.grad[i];
        m[i] = b1_ * m[i] + (1 - b1_) * g;
        v[i] = b2_ * v[i] + (1 - b2_) * g * g;
        p.value[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps_);
      }
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  std::vector<ParamRef> params_;
  std::vector<std::vector<double>> m_, v_;
  double t_ = 0;
};

inline void glorot_uniform(Rng& rng, std::vector<double>& w, std::size_t fan_in,
                           std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& e : w) e = rng.uniform(-limit, limit);
}

inline void zero_grads(const std::vector<ParamRef>& params) {
  for (const auto& p : params) std::fill(p.grad, p.grad + p.size, 0.0);
}

/// Inverted dropout mask: 0 with probability rate, 1 / (1 - rate) otherwise.
inline void dropout_mask(Rng& rng, double rate, double* mask, std::size_t n) {
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < rate ? 0.0 : keep;
}

}  // namespace fdbench::detail
