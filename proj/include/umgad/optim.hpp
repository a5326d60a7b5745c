#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "umgad/autodiff.hpp"

namespace umgad {

struct AdamConfig {
  double lr = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments, one pair per parameter, in parameter order.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;

  void ensure(std::span<ParamTensor* const> params) {
    if (m.size() == params.size()) return;
    m.clear();
    v.clear();
    for (const ParamTensor* p : params) {
      m.emplace_back(p->value.rows(), p->value.cols());
      v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
};

/// Adam with decoupled weight decay. `step` is 1-based and drives bias correction.
inline void adam_step(std::span<ParamTensor* const> params, AdamState& state, const AdamConfig& cfg, long step) {
  state.ensure(params);
  state.step = step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& value = params[p]->value.values();
    const auto& grad = params[p]->grad.values();
    auto& m = state.m[p].values();
    auto& v = state.v[p].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      value[i] -= cfg.lr * cfg.weight_decay * value[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

/// Builds the loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

/// Relative error used by the gradient checker: |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Compare recorded gradients with central differences, coordinate by
/// coordinate. Returns the max relative error over all coordinates.
inline double finite_diff_check(const LossBuilder& loss_fn, std::span<ParamTensor* const> params, double epsilon = 1e-5,
                                double floor = 1e-6) {
  for (ParamTensor* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = loss_fn(tape);
    tape.backward(loss);
  }
  auto eval = [&] {
    Tape tape;
    return loss_fn(tape).scalar();
  };
  double worst = 0.0;
  for (ParamTensor* p : params) {
    auto& vals = p->value.values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + epsilon;
      const double up = eval();
      vals[i] = saved - epsilon;
      const double down = eval();
      vals[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      worst = std::max(worst, relative_error(numeric, p->grad.values()[i], floor));
    }
  }
  return worst;
}

}  // namespace umgad
