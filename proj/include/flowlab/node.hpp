#pragma once

#include <cstdint>
#include <functional>

#include "flowlab/ode.hpp"
#include "flowlab/smooth_map.hpp"

namespace flowlab {

/// A one-parameter family Phi(., t) with Phi(., 0) = id and the additive group
/// law. `support` contains every point moved by any Phi(., t).
struct FlowHandle {
  int dim = 0;
  std::function<Vec(const Vec&, double)> phi;
  Box support;
  /// Generating field, when one is known (used for RK4 reference solutions).
  std::optional<VectorField> field;

  Vec operator()(const Vec& x, double t) const { return phi(x, t); }
  /// x -> Phi(x, t) with a finite-difference Jacobian.
  SmoothMap at(double t) const;
};

/// Flow of an autonomous field by RK4 at `steps_per_unit` steps per unit time.
FlowHandle ode_flow(const VectorField& field, const Box& support, int steps_per_unit = 256);

/// v~(r) = exp(-1/(r(1-r))) on (0,1), zero elsewhere; all derivatives vanish at 0 and 1.
double bump(double r);
double bump_derivative(double r);

/// 1-D field v(x) = amplitude * v~(|x|) sign(x), supported in [-1, 1].
VectorField bump_field_1d(double amplitude = 10.0);
/// RK4 flow of `bump_field_1d`.
FlowHandle bump_flow_1d(double amplitude = 10.0, int steps_per_unit = 256);

/// Radial profile exp(1 - 1/(1 - s^2)) with s mapping [r_in, r_out] onto [-1, 1];
/// equals 1 at the mid radius and vanishes outside (r_in, r_out).
double radial_profile(double r, double r_in, double r_out);

/// Phi(x, t) = exp(t phi(|x|) A) x in closed form (d = 2 rotation angle,
/// d = 3 Rodrigues, otherwise the matrix exponential). Throws unless A is skew.
FlowHandle rotation_flow(const Mat& a, double r_in, double r_out);
/// The generating field x -> phi(|x|) A x of `rotation_flow`.
VectorField rotation_field(const Mat& a, double r_in, double r_out);

/// Worst |Phi(x, s+t) - Phi(Phi(x, s), t)| over `trials` seeded triples,
/// s, t uniform in [0, t_max / 2] and x uniform in `box`.
double group_law_error(const FlowHandle& flow, const Box& box, int trials, std::uint64_t seed,
                       double t_max = 1.0);

/// Worst |Phi(x, t) - x| for points on shells just outside the declared support.
double support_leak(const FlowHandle& flow, int trials, std::uint64_t seed);

struct GronwallReport {
  double delta = 0.0;
  double lip_f = 0.0;
  double bound = 0.0;
  double measured = 0.0;
  double slack = 0.0;
  bool pass = false;
  int steps = 0;
  int n_probe = 0;
  Box inflated;
};

inline constexpr int kGronwallSteps = 2048;
inline constexpr double kGronwallSlack = 1e-6;

/// Compares the time-1 maps of F and its approximation f on K.
/// delta is the grid sup of |F - f| on K inflated by 2 e^{Lip F}; the
/// certificate passes iff the measured gap is <= 2 delta e^{Lip F} + 1e-6.
GronwallReport gronwall_certificate(const VectorField& big_f, const VectorField& small_f,
                                    const Box& k, int n_probe, std::uint64_t seed = 7,
                                    int delta_grid = 0);

Json to_json(const GronwallReport& r);

}  // namespace flowlab
