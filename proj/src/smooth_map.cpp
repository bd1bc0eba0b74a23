#include "flowlab/smooth_map.hpp"

#include <algorithm>

#include "flowlab/numerics.hpp"

namespace flowlab {

SmoothMap identity_map(int dim) {
  return {dim, [](const Vec& x) { return x; },
          [dim](const Vec&) { return Mat::Identity(dim, dim).eval(); }};
}

SmoothMap linear_map(const Mat& a, const Vec& b) {
  require_dim(a.cols(), a.rows(), "linear_map");
  require_dim(b.size(), a.rows(), "linear_map");
  return {static_cast<int>(a.rows()), [a, b](const Vec& x) { return (a * x + b).eval(); },
          [a](const Vec&) { return a; }};
}

Mat jacobian(const SmoothMap& f, const Vec& x, double step) {
  require_dim(x.size(), f.dim, "jacobian");
  if (f.jac) return f.jac(x);
  return fd_jacobian(f.eval, x, step);
}

SmoothMap compose(const SmoothMap& g, const SmoothMap& f) {
  require_dim(g.dim, f.dim, "compose");
  SmoothMap out{f.dim, [g, f](const Vec& x) { return g(f(x)); }, {}};
  if (g.jac && f.jac) {
    out.jac = [g, f](const Vec& x) { return (g.jac(f(x)) * f.jac(x)).eval(); };
  }
  return out;
}

double jacobian_fd_error(const SmoothMap& f, const std::vector<Vec>& probes, double step) {
  if (!f.jac) return 0.0;
  double worst = 0.0;
  for (const Vec& x : probes) {
    const Mat fd = fd_jacobian(f.eval, x, step);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    worst = std::max(worst, (f.jac(x) - fd).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace flowlab
