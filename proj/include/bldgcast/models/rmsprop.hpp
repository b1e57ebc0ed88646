#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bldgcast/error.hpp"

namespace bldgcast {

struct RmspropState {
  std::vector<double> accumulator;  // running mean of squared gradients, >= 0
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;

  RmspropState() = default;
  RmspropState(std::size_t n, double lr = 1e-3, double rho_ = 0.9, double eps = 1e-8)
      : accumulator(n, 0.0), learning_rate(lr), rho(rho_), epsilon(eps) {}
};

/// acc <- rho acc + (1 - rho) g^2;  param <- param - lr g / sqrt(acc + eps).
inline void rmsprop_step(std::span<double> params, std::span<const double> grads, RmspropState& state) {
  if (params.size() != grads.size() || params.size() != state.accumulator.size()) {
    fail(ErrorCode::ShapeMismatch, "params " + std::to_string(params.size()) + ", grads " +
                                       std::to_string(grads.size()) + ", state " +
                                       std::to_string(state.accumulator.size()));
  }
  const double rho = state.rho;
  const double lr = state.learning_rate;
  const double eps = state.epsilon;
  double* acc = state.accumulator.data();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    acc[i] = rho * acc[i] + (1.0 - rho) * g * g;
    params[i] -= lr * g / std::sqrt(acc[i] + eps);
  }
}

}  // namespace bldgcast
