#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/linalg.hpp"

namespace bldgcast {

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double alpha = 1.0;
  bool fit_intercept = true;

  bool operator==(const RidgeModel&) const = default;
};

/// Minimizes |y - Xw - b|^2 + alpha |w|^2 with an unpenalized intercept by
/// solving the normal equations of the column-centered problem.
inline RidgeModel ridge_fit(const Matrix& x, std::span<const double> y, double alpha, bool fit_intercept = true) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n == 0 || n != y.size()) {
    fail(ErrorCode::DimensionMismatch, std::to_string(n) + " rows vs " + std::to_string(y.size()) + " targets");
  }
  if (!(alpha >= 0.0)) fail(ErrorCode::InvalidConfig, "alpha must be non-negative");

  std::vector<double> x_mean(p, 0.0);
  double y_mean = 0.0;
  if (fit_intercept) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) x_mean[j] += x(i, j);
      y_mean += y[i];
    }
    for (double& m : x_mean) m /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
  }

  Matrix gram(p, p);
  std::vector<double> rhs(p, 0.0);
  std::vector<double> xc(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) xc[j] = x(i, j) - x_mean[j];
    const double yc = y[i] - y_mean;
    for (std::size_t a = 0; a < p; ++a) {
      rhs[a] += xc[a] * yc;
      for (std::size_t b = 0; b <= a; ++b) gram(a, b) += xc[a] * xc[b];
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    gram(a, a) += alpha;
    for (std::size_t b = 0; b < a; ++b) gram(b, a) = gram(a, b);
  }

  RidgeModel m;
  m.alpha = alpha;
  m.fit_intercept = fit_intercept;
  m.weights = p == 0 ? std::vector<double>{} : cholesky_solve(std::move(gram), std::move(rhs));
  m.intercept = y_mean;
  for (std::size_t j = 0; j < p; ++j) m.intercept -= m.weights[j] * x_mean[j];
  return m;
}

inline std::vector<double> ridge_predict(const RidgeModel& m, const Matrix& x) {
  if (x.cols() != m.weights.size()) {
    fail(ErrorCode::DimensionMismatch, std::to_string(x.cols()) + " columns vs " + std::to_string(m.weights.size()) + " weights");
  }
  std::vector<double> out(x.rows(), m.intercept);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out[i] += m.weights[j] * x(i, j);
  }
  return out;
}

}  // namespace bldgcast
