#include "flowlab/sobolev.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace flowlab {

void SeminormSpec::validate() const {
  if (r != 0 && r != 1) fail(ErrorKind::kInvalidArgument, "seminorm: r must be 0 or 1");
  if (p != 1.0 && p != 2.0 && p != kSupNorm) fail(ErrorKind::kInvalidArgument, "seminorm: p must be 1, 2 or inf");
  if (resolution < 8) fail(ErrorKind::kInvalidArgument, "seminorm: resolution must be >= 8 per axis");
  if (k.dim() < 1) fail(ErrorKind::kInvalidArgument, "seminorm: empty box");
  for (int i = 0; i < k.dim(); ++i) {
    const double cell = (k.hi[i] - k.lo[i]) / (resolution - 1);
    if (!(h > 0.0) || (cell > 0.0 && h > 0.01 * cell)) {
      fail(ErrorKind::kInvalidArgument, "seminorm: step h must be positive and well below the cell width");
    }
  }
}

namespace {

// Trapezoid weight of node x on the tensor grid: product of per-axis weights.
double node_weight(const Box& k, int n, const Vec& x) {
  double w = 1.0;
  for (int i = 0; i < k.dim(); ++i) {
    const double width = k.hi[i] - k.lo[i];
    if (width == 0.0) continue;
    const double cell = width / (n - 1);
    const bool end = std::abs(x[i] - k.lo[i]) < 0.25 * cell || std::abs(x[i] - k.hi[i]) < 0.25 * cell;
    w *= end ? 0.5 * cell : cell;
  }
  return w;
}

}  // namespace

double seminorm_diff(const SmoothMap& f, const SmoothMap& g, const SeminormSpec& spec) {
  spec.validate();
  require_dim(f.dim, spec.k.dim(), "seminorm_diff");
  require_dim(g.dim, spec.k.dim(), "seminorm_diff");
  const int d = spec.k.dim();
  const bool sup = spec.p == kSupNorm;
  // acc[0] is the value term, acc[1 + i] the d/dx_i term.
  std::vector<double> acc(spec.r == 1 ? d + 1 : 1, 0.0);
  for_each_node(spec.k, spec.resolution, [&](const Vec& x) {
    Vec gap;
    Mat jgap;
    try {
      gap = f(x) - g(x);
      if (spec.r == 1) jgap = jacobian(f, x, spec.h) - jacobian(g, x, spec.h);
    } catch (const Error& e) {
      fail(e.kind(), "seminorm_diff: evaluation failed at node (" + format_point(x) + "): " + e.what());
    }
    if (!gap.allFinite() || (spec.r == 1 && !jgap.allFinite())) {
      fail(ErrorKind::kNonFinite, "seminorm_diff: non-finite value at node (" + format_point(x) + ")");
    }
    const double w = sup ? 1.0 : node_weight(spec.k, spec.resolution, x);
    auto add = [&](double& a, double v) { a = sup ? std::max(a, v) : a + w * std::pow(v, spec.p); };
    add(acc[0], gap.norm());
    if (spec.r == 1) {
      for (int i = 0; i < d; ++i) add(acc[1 + i], jgap.col(i).norm());
    }
  });
  double total = 0.0;
  for (const double a : acc) total += sup ? a : std::pow(a, 1.0 / spec.p);
  return total;
}

double seminorm(const SmoothMap& f, const SeminormSpec& spec) {
  SeminormSpec s = spec;
  s.r = 0;
  const SmoothMap zero{f.dim, [d = f.dim](const Vec&) { return Vec::Zero(d).eval(); }, {}};
  return seminorm_diff(f, zero, s);
}

}  // namespace flowlab
