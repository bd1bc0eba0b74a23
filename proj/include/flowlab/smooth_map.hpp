#pragma once

#include <functional>

#include "flowlab/core.hpp"

namespace flowlab {

/// A map R^d -> R^d with an optional analytic Jacobian.
struct SmoothMap {
  int dim = 0;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jac;

  Vec operator()(const Vec& x) const { return eval(x); }
};

SmoothMap identity_map(int dim);
SmoothMap linear_map(const Mat& a, const Vec& b);

/// Analytic Jacobian when present, otherwise central differences with `step`.
Mat jacobian(const SmoothMap& f, const Vec& x, double step = 1e-6);

/// g o f (f applied first).
SmoothMap compose(const SmoothMap& g, const SmoothMap& f);

/// Worst relative error max|J - J_fd| / max(1, max|J_fd|) over the probes;
/// 0 when `f` has no analytic Jacobian.
double jacobian_fd_error(const SmoothMap& f, const std::vector<Vec>& probes, double step = 1e-6);

}  // namespace flowlab
