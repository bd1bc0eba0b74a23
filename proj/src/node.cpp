#include "flowlab/node.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "flowlab/numerics.hpp"

namespace flowlab {

namespace {

constexpr double kSkewTol = 1e-12;

int steps_for(double t, int steps_per_unit) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(t) * steps_per_unit - 1e-9)));
}

double sup_on_grid(const std::function<double(double)>& g, double lo, double hi, int n) {
  double m = 0.0;
  for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(g(lo + (hi - lo) * i / n)));
  return m;
}

double radial_profile_derivative(double r, double r_in, double r_out) {
  const double s = (2.0 * r - r_in - r_out) / (r_out - r_in);
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return radial_profile(r, r_in, r_out) * (-2.0 * s / (q * q)) * (2.0 / (r_out - r_in));
}

void check_skew(const Mat& a, double r_in, double r_out) {
  require_dim(a.cols(), a.rows(), "rotation_flow");
  if (a.rows() < 2) fail(ErrorKind::kInvalidArgument, "rotation_flow: dimension must be >= 2");
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > kSkewTol) {
    fail(ErrorKind::kInvalidArgument, "rotation_flow: A + A^T != 0");
  }
  if (!(0.0 < r_in && r_in < r_out)) {
    fail(ErrorKind::kInvalidArgument, "rotation_flow: need 0 < r_in < r_out");
  }
}

Mat skew_exp(const Mat& a, double scale) {
  const Eigen::Index d = a.rows();
  if (scale == 0.0) return Mat::Identity(d, d);
  if (d == 2) {
    const double th = scale * a(1, 0);
    Mat r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return r;
  }
  if (d == 3) {
    const Eigen::Vector3d w(a(2, 1), a(0, 2), a(1, 0));
    const double n = w.norm();
    if (n == 0.0) return Mat::Identity(3, 3);
    const Mat k = a / n;
    const double th = scale * n;
    return Mat::Identity(3, 3) + std::sin(th) * k + (1.0 - std::cos(th)) * (k * k);
  }
  return (scale * a).exp();
}

}  // namespace

SmoothMap FlowHandle::at(double t) const {
  return {dim, [phi = phi, t](const Vec& x) { return phi(x, t); }, {}};
}

FlowHandle ode_flow(const VectorField& field, const Box& support, int steps_per_unit) {
  FlowHandle h;
  h.dim = field.dim;
  h.support = support;
  h.field = field;
  h.phi = [field, steps_per_unit](const Vec& x, double t) {
    if (t == 0.0) return x;
    return integrate(field, x, t, steps_for(t, steps_per_unit));
  };
  return h;
}

double bump(double r) {
  if (r <= 0.0 || r >= 1.0) return 0.0;
  return std::exp(-1.0 / (r * (1.0 - r)));
}

double bump_derivative(double r) {
  if (r <= 0.0 || r >= 1.0) return 0.0;
  const double q = r * (1.0 - r);
  return bump(r) * (1.0 - 2.0 * r) / (q * q);
}

VectorField bump_field_1d(double amplitude) {
  const double lip = 1.001 * amplitude * sup_on_grid(bump_derivative, 0.0, 1.0, 100000);
  VectorField f = closure_vector_field(
      1,
      [amplitude](const Vec& x) {
        const double r = std::abs(x[0]);
        return Vec::Constant(1, r == 0.0 ? 0.0 : amplitude * bump(r) * (x[0] > 0 ? 1.0 : -1.0));
      },
      lip, 1.0);
  return f;
}

FlowHandle bump_flow_1d(double amplitude, int steps_per_unit) {
  return ode_flow(bump_field_1d(amplitude), Box::cube(1, -1.0, 1.0), steps_per_unit);
}

double radial_profile(double r, double r_in, double r_out) {
  const double s = (2.0 * r - r_in - r_out) / (r_out - r_in);
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

FlowHandle rotation_flow(const Mat& a, double r_in, double r_out) {
  check_skew(a, r_in, r_out);
  FlowHandle h;
  h.dim = static_cast<int>(a.rows());
  h.support = Box::cube(h.dim, -r_out, r_out);
  h.field = rotation_field(a, r_in, r_out);
  h.phi = [a, r_in, r_out](const Vec& x, double t) {
    require_dim(x.size(), a.rows(), "rotation_flow");
    return (skew_exp(a, t * radial_profile(x.norm(), r_in, r_out)) * x).eval();
  };
  return h;
}

VectorField rotation_field(const Mat& a, double r_in, double r_out) {
  check_skew(a, r_in, r_out);
  const double dphi = sup_on_grid(
      [&](double r) { return radial_profile_derivative(r, r_in, r_out); }, r_in, r_out, 20000);
  // |D(phi(|x|) A x)| <= |A| (phi + |x| |phi'|) with phi <= 1 and |x| <= r_out on the support.
  const double lip = 1.001 * op_norm(a) * (1.0 + r_out * dphi);
  return closure_vector_field(
      static_cast<int>(a.rows()),
      [a, r_in, r_out](const Vec& x) { return (radial_profile(x.norm(), r_in, r_out) * (a * x)).eval(); },
      lip, r_out);
}

double group_law_error(const FlowHandle& flow, const Box& box, int trials, std::uint64_t seed,
                       double t_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    Vec x(flow.dim);
    for (int i = 0; i < flow.dim; ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
    const double s = 0.5 * t_max * unit(rng);
    const double t = 0.5 * t_max * unit(rng);
    worst = std::max(worst, (flow(x, s + t) - flow(flow(x, s), t)).cwiseAbs().maxCoeff());
  }
  return worst;
}

double support_leak(const FlowHandle& flow, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec centre = 0.5 * (flow.support.lo + flow.support.hi);
  const double radius = 0.5 * flow.support.diameter();
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    Vec dir(flow.dim);
    for (int i = 0; i < flow.dim; ++i) dir[i] = g(rng);
    const Vec x = centre + dir.normalized() * radius * (1.0 + 1e-3 + unit(rng));
    const double t = unit(rng);
    worst = std::max(worst, (flow(x, t) - x).cwiseAbs().maxCoeff());
  }
  return worst;
}

GronwallReport gronwall_certificate(const VectorField& big_f, const VectorField& small_f,
                                    const Box& k, int n_probe, std::uint64_t seed,
                                    int delta_grid) {
  require_dim(small_f.dim, big_f.dim, "gronwall_certificate");
  require_dim(k.dim(), big_f.dim, "gronwall_certificate");
  if (n_probe < 1) fail(ErrorKind::kInvalidArgument, "gronwall_certificate: n_probe must be >= 1");
  GronwallReport r;
  r.lip_f = big_f.lip;
  r.steps = kGronwallSteps;
  r.n_probe = n_probe;
  r.inflated = k.inflated(2.0 * std::exp(big_f.lip));

  const int d = k.dim();
  const int n = delta_grid > 0 ? delta_grid : (d == 1 ? 2001 : d == 2 ? 129 : 33);
  for_each_node(r.inflated, n, [&](const Vec& x) {
    r.delta = std::max(r.delta, (big_f(x) - small_f(x)).norm());
  });

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int p = 0; p < n_probe; ++p) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = k.lo[i] + (k.hi[i] - k.lo[i]) * unit(rng);
    const Vec a = integrate(big_f, x, 1.0, kGronwallSteps);
    const Vec b = integrate(small_f, x, 1.0, kGronwallSteps);
    r.measured = std::max(r.measured, (a - b).norm());
  }
  r.bound = 2.0 * r.delta * std::exp(big_f.lip);
  r.slack = r.bound + kGronwallSlack - r.measured;
  r.pass = r.slack >= 0.0;
  return r;
}

Json to_json(const GronwallReport& r) {
  return {{"delta", r.delta},     {"lip_F", r.lip_f}, {"bound", r.bound},
          {"measured", r.measured}, {"slack", r.slack}, {"pass", r.pass},
          {"steps", r.steps},     {"n_probe", r.n_probe}};
}

}  // namespace flowlab
