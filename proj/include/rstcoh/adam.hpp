#pragma once

#include <cmath>
#include <vector>

#include "rstcoh/tensor.hpp"

namespace rstcoh {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates, one pair per bundle entry.
struct AdamState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;

  explicit AdamState(const ParameterBundle& params) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      first.emplace_back(params.value(ParamId{k}).shape);
      second.emplace_back(params.value(ParamId{k}).shape);
    }
  }
};

/// Bias-corrected Adam update using the gradients currently stored in
/// `params`. `step` counts from 1.
inline void adam_step(ParameterBundle& params, AdamState& state, long step,
                      const AdamConfig& cfg) {
  if (step < 1) throw StateError("adam_step: step index must be >= 1, got " + std::to_string(step));
  if (state.first.size() != params.size() || state.second.size() != params.size())
    throw StateError("adam_step: optimizer state does not match parameter bundle");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& theta = params.value(ParamId{k}).data;
    const auto& g = params.grad(ParamId{k}).data;
    auto& m = state.first[k].data;
    auto& v = state.second[k].data;
    if (m.size() != theta.size() || v.size() != theta.size())
      throw StateError("adam_step: moment shape mismatch for '" + params.name(ParamId{k}) + "'");
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      theta[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace rstcoh
