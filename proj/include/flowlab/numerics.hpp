#pragma once

#include <functional>
#include <optional>

#include "flowlab/core.hpp"

namespace flowlab {

using ScalarFn = std::function<double(double)>;
using MapFn = std::function<Vec(const Vec&)>;

struct MonotoneSolveOptions {
  double tol = 1e-12;      // absolute tolerance in x
  int max_doublings = 60;  // bracket growth limit
  int max_iter = 400;
};

/// Solves g(x) = target for a monotone scalar g.
///
/// The bracket [lo, hi] is a starting guess; it is grown geometrically until
/// it straddles the target. Inside the bracket a safeguarded Newton step is
/// used when `dg` is provided, falling back to bisection whenever the step
/// leaves the bracket or the derivative is not usable.
///
/// Throws kBracketNotFound when the target is not bracketed after
/// `max_doublings` expansions on either side.
double solve_monotone(const ScalarFn& g, const ScalarFn* dg, double target, double lo,
                      double hi, bool increasing = true,
                      const MonotoneSolveOptions& opts = {});

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const ScalarFn& f, double a, double b, double tol = 1e-10,
                        int max_depth = 50);

/// Central-difference Jacobian of `f` at `x`, output dimension inferred.
Mat fd_jacobian(const MapFn& f, const Vec& x, double step = 1e-6);

/// log(sigmoid(z)) without overflow.
double log_sigmoid(double z);
double sigmoid(double z);

/// log(sum(exp(v))) for a nonempty array.
double log_sum_exp(const Vec& v);

/// Largest singular value.
double op_norm(const Mat& m);

/// `n` evenly spaced values from a to b (inclusive).
Vec linspace(double a, double b, int n);

/// Least-squares slope of y against x.
double fit_slope(const Vec& x, const Vec& y);

}  // namespace flowlab
