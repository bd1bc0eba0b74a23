#include "flowlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace flowlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kSaturation: return "saturation";
    case ErrorKind::kInvariantViolation: return "invariant_violation";
    case ErrorKind::kBracketNotFound: return "bracket_not_found";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kNotSerializable: return "not_serializable";
    case ErrorKind::kBudgetExceeded: return "budget_exceeded";
    case ErrorKind::kSingular: return "singular";
    case ErrorKind::kHypothesis: return "hypothesis";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Box::Box(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  require_dim(hi.size(), lo.size(), "Box");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      fail(ErrorKind::kInvalidArgument, "Box: lo > hi on axis " + std::to_string(i));
    }
  }
}

Box Box::cube(int dim, double lo, double hi) {
  return Box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

bool Box::contains(const Vec& x, double slack) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

Box Box::inflated(double margin) const {
  return Box(lo.array() - margin, hi.array() + margin);
}

bool Box::contains_box(const Box& other) const {
  return (other.lo.array() >= lo.array()).all() && (other.hi.array() <= hi.array()).all();
}

namespace {

double effective_tol(double tol, double x) {
  return std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x));
}

}  // namespace

double solve_monotone(const ScalarFn& g, const ScalarFn* dg, double target, double lo,
                      double hi, bool increasing, const MonotoneSolveOptions& opts) {
  const double sgn = increasing ? 1.0 : -1.0;
  auto phi = [&](double x) { return sgn * (g(x) - target); };
  if (!(lo < hi)) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5;
    hi = mid + 0.5;
  }

  double width = hi - lo;
  double f_lo = phi(lo);
  int grow = 0;
  while (f_lo > 0.0) {
    if (++grow > opts.max_doublings) {
      fail(ErrorKind::kBracketNotFound, "solve_monotone: lower bracket not found for target " +
                                            std::to_string(target));
    }
    hi = lo;
    lo -= width;
    width *= 2.0;
    f_lo = phi(lo);
  }
  double f_hi = phi(hi);
  grow = 0;
  while (f_hi < 0.0) {
    if (++grow > opts.max_doublings) {
      fail(ErrorKind::kBracketNotFound, "solve_monotone: upper bracket not found for target " +
                                            std::to_string(target));
    }
    lo = hi;
    f_lo = f_hi;
    hi += width;
    width *= 2.0;
    f_hi = phi(hi);
  }
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) {
    fail(ErrorKind::kNonFinite, "solve_monotone: non-finite value at bracket ends");
  }
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double fx = phi(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= effective_tol(opts.tol, x)) return 0.5 * (lo + hi);

    double next = 0.5 * (lo + hi);
    if (dg != nullptr) {
      const double slope = sgn * (*dg)(x);
      if (slope > 0.0 && std::isfinite(slope)) {
        const double newton = x - fx / slope;
        if (newton > lo && newton < hi) {
          if (std::abs(newton - x) <= effective_tol(opts.tol, x)) return newton;
          next = newton;
        }
      }
    }
    x = next;
  }
  return x;
}

namespace {

double simpson_step(const ScalarFn& f, double a, double fa, double m, double fm, double b,
                    double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, m, fm, b, fb, whole, tol, max_depth);
}

Mat fd_jacobian(const MapFn& f, const Vec& x, double step) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + step;
    const Vec fp = f(xp);
    xp[j] = x[j] - step;
    const Vec fm = f(xp);
    xp[j] = x[j];
    jac.col(j) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Vec linspace(double a, double b, int n) {
  if (n == 1) return Vec::Constant(1, a);
  return Vec::LinSpaced(n, a, b);
}

double fit_slope(const Vec& x, const Vec& y) {
  const double mx = x.mean();
  const double my = y.mean();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double sxx = (x.array() - mx).square().sum();
  return sxy / sxx;
}

}  // namespace flowlab
