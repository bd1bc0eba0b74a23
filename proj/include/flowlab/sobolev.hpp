#pragma once

#include <limits>

#include "flowlab/smooth_map.hpp"

namespace flowlab {

inline constexpr double kSupNorm = std::numeric_limits<double>::infinity();

struct SeminormSpec {
  Box k;
  int r = 0;          // 0 or 1
  double p = kSupNorm;  // 1, 2 or infinity
  int resolution = 33;  // nodes per axis, endpoints included
  double h = 1e-5;      // central-difference step when no analytic Jacobian is present

  void validate() const;
};

/// ||f - g||_{K,r,p}: sum over |alpha| <= r of the p-aggregate of the
/// Euclidean norm of d^alpha (f - g) on the node grid. p < inf uses
/// trapezoid weights, so the value approximates the integral over K.
double seminorm_diff(const SmoothMap& f, const SmoothMap& g, const SeminormSpec& spec);

/// The r = 0 value of a single map, ||f||_{K,0,p}.
double seminorm(const SmoothMap& f, const SeminormSpec& spec);

}  // namespace flowlab
