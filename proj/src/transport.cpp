#include "flowlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flowlab {

TriangularMap::TriangularMap(const GridMeasure& mu) : grid_(mu.grid) {
  const int d = grid_.dim();
  if (d > 3) fail(ErrorKind::kBudgetExceeded, "knothe_map: dimension must be <= 3");

  Vec w = mu.weights;
  for (Eigen::Index c = 0; c < w.size(); ++c) {
    if (w[c] < kDensityFloor) {
      w[c] = kDensityFloor;
      ++floored_;
    }
  }
  w /= w.sum();

  // marginal[k]: masses over axes k..d-1 (leading axes summed out), row-major.
  std::vector<std::vector<double>> marginal(d + 1);
  marginal[0].assign(w.data(), w.data() + w.size());
  for (int k = 0; k < d; ++k) {
    const long inner = static_cast<long>(marginal[k].size()) / grid_.n[k];
    marginal[k + 1].assign(inner, 0.0);
    for (long c = 0; c < static_cast<long>(marginal[k].size()); ++c) {
      marginal[k + 1][c % inner] += marginal[k][c];
    }
  }

  tables_.resize(d);
  stride_.resize(d);
  for (int k = 0; k < d; ++k) {
    const int nk = grid_.n[k];
    const long cond = static_cast<long>(marginal[k + 1].size());
    stride_[k] = cond;
    auto& t = tables_[k];
    t.assign(static_cast<std::size_t>(nk + 1) * cond, 0.0);
    for (long c = 0; c < cond; ++c) {
      const double total = marginal[k + 1][c];
      if (!(total > 0.0)) fail(ErrorKind::kInvariantViolation, "knothe_map: degenerate marginal");
      double acc = 0.0;
      for (int j = 0; j < nk; ++j) {
        acc += marginal[k][j * cond + c];
        t[(j + 1) * cond + c] = acc / total;
      }
      t[static_cast<std::size_t>(nk) * cond + c] = 1.0;
    }
  }
}

std::vector<TriangularMap::Corner> TriangularMap::corners(int axis, const Vec& x) const {
  // Multilinear weights over the cell centres of the conditioning axes.
  std::vector<Corner> out{{0, 1.0}};
  for (int m = axis + 1; m < dim(); ++m) {
    const int nm = grid_.n[m];
    const double u = std::clamp((x[m] - grid_.lo[m]) / grid_.width(m) - 0.5, 0.0, nm - 1.0);
    const int i0 = std::min(static_cast<int>(u), nm - 2);
    const double f = u - i0;
    std::vector<Corner> next;
    for (const auto& c : out) {
      next.push_back({c.offset * nm + i0, c.weight * (1.0 - f)});
      next.push_back({c.offset * nm + i0 + 1, c.weight * f});
    }
    out = std::move(next);
  }
  return out;
}

std::vector<double> TriangularMap::node_cdf(int axis, const Vec& x) const {
  const int nk = grid_.n[axis];
  const auto cs = corners(axis, x);
  std::vector<double> v(nk + 1, 0.0);
  for (int j = 0; j <= nk; ++j) {
    for (const auto& c : cs) v[j] += c.weight * tables_[axis][j * stride_[axis] + c.offset];
  }
  return v;
}

double TriangularMap::component(int axis, const Vec& x) const {
  const int nk = grid_.n[axis];
  const double u = (x[axis] - grid_.lo[axis]) / grid_.width(axis);
  if (u <= 0.0) return 0.0;
  if (u >= nk) return 1.0;
  const int j = std::min(static_cast<int>(u), nk - 1);
  const double f = u - j;
  double a = 0.0, b = 0.0;
  for (const auto& c : corners(axis, x)) {
    a += c.weight * tables_[axis][j * stride_[axis] + c.offset];
    b += c.weight * tables_[axis][(j + 1) * stride_[axis] + c.offset];
  }
  return a + f * (b - a);
}

Vec TriangularMap::apply(const Vec& x) const {
  require_dim(x.size(), dim(), "TriangularMap::apply");
  Vec u(dim());
  for (int k = 0; k < dim(); ++k) u[k] = component(k, x);
  return u;
}

Vec TriangularMap::inverse(const Vec& u) const {
  require_dim(u.size(), dim(), "TriangularMap::inverse");
  Vec x = 0.5 * (grid_.lo + grid_.hi);
  for (int k = dim() - 1; k >= 0; --k) {
    const std::vector<double> v = node_cdf(k, x);
    const double target = std::clamp(u[k], 0.0, 1.0);
    // Bisection over the monotone node table, then exact linear inversion in the cell.
    int lo = 0, hi = grid_.n[k];
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (v[mid] < target ? lo : hi) = mid;
    }
    const double span = v[hi] - v[lo];
    const double f = span > 0.0 ? std::clamp((target - v[lo]) / span, 0.0, 1.0) : 0.5;
    x[k] = grid_.lo[k] + (lo + f) * grid_.width(k);
  }
  return x;
}

TriangularMap knothe_map(const GridMeasure& mu) { return TriangularMap(mu); }

ScalarField mollify(const ScalarField& tau, double t, const Box& box, const MollifyOptions& opts) {
  if (!(t > 0.0)) fail(ErrorKind::kInvalidArgument, "mollify: t must be > 0");
  const int d = tau.arity;
  require_dim(box.dim(), d, "mollify");
  const Box reach = box.inflated(t);
  if (tau.domain && !tau.domain->contains_box(reach)) {
    fail(ErrorKind::kHypothesis, "mollify: box inflated by t leaves the evaluable region of tau");
  }

  // Kernel nodes on a tensor grid over [-t, t]^d, kept where |y| < t.
  std::vector<Vec> nodes;
  std::vector<double> weights;
  std::vector<int> counts(d, opts.nodes_other);
  counts[d - 1] = opts.nodes_last;
  std::vector<int> idx(d, 0);
  double sum = 0.0;
  while (true) {
    Vec y(d);
    for (int i = 0; i < d; ++i) y[i] = -t + 2.0 * t * (idx[i] + 0.5) / counts[i];
    const double r2 = y.squaredNorm() / (t * t);
    if (r2 < 1.0) {
      const double w = std::exp(-1.0 / (1.0 - r2));
      nodes.push_back(y);
      weights.push_back(w);
      sum += w;
    }
    int a = d - 1;
    while (a >= 0 && ++idx[a] == counts[a]) idx[a--] = 0;
    if (a < 0) break;
  }
  for (double& w : weights) w /= sum;

  ScalarField out = closure_field(d, [tau, nodes, weights](const Vec& x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * tau(x - nodes[k]);
    return acc;
  });
  out.domain = box;
  return out;
}

SampleSet pushforward_samples(const Inn& inn, const SampleSet& base) {
  require_dim(base.dim(), inn.dim, "pushforward_samples");
  SampleSet out{Mat(base.dim(), base.size()), base.seed};
  for (int k = 0; k < base.size(); ++k) out.points.col(k) = inn_forward(inn, base.points.col(k));
  return out;
}

SampleSet pushforward_samples(const Inn& inn, const Sampler& base, int n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::kInvalidArgument, "pushforward_samples: n must be >= 1");
  std::mt19937_64 rng(seed);
  SampleSet s{Mat(inn.dim, n), seed};
  for (int k = 0; k < n; ++k) s.points.col(k) = base(rng);
  return pushforward_samples(inn, s);
}

PushforwardResult grid_pushforward(const Inn& inn, const GridMeasure& mu, const Grid& target) {
  require_dim(mu.dim(), inn.dim, "grid_pushforward");
  require_dim(target.dim(), inn.dim, "grid_pushforward");
  Vec w(target.cells());
  long failed = 0;
  for (long c = 0; c < target.cells(); ++c) {
    try {
      const Vec x = inn_inverse(inn, target.center(c));
      const double p = mu.density(x);
      w[c] = p > 0.0 ? p * std::exp(-inn_log_det(inn, x)) * target.cell_volume() : 0.0;
      if (!std::isfinite(w[c])) throw Error(ErrorKind::kNonFinite, "non-finite density");
    } catch (const Error&) {
      w[c] = 0.0;
      ++failed;
    }
  }
  if (failed * 100 > target.cells()) {
    fail(ErrorKind::kSaturation, "grid_pushforward: inversion failed on " + std::to_string(failed) +
                                     " of " + std::to_string(target.cells()) + " cells");
  }
  const double raw = w.sum();
  return {GridMeasure(target, w), raw, failed};
}

GridMeasure map_pushforward(const std::function<Vec(const Vec&)>& map, const GridMeasure& mu,
                            const Grid& target, int sub) {
  require_dim(target.dim(), mu.dim(), "map_pushforward");
  if (sub < 1) fail(ErrorKind::kInvalidArgument, "map_pushforward: sub must be >= 1");
  const int d = mu.dim();
  long pieces = 1;
  for (int i = 0; i < d; ++i) pieces *= sub;
  Vec w = Vec::Zero(target.cells());
  for (long c = 0; c < mu.grid.cells(); ++c) {
    if (mu.weights[c] == 0.0) continue;
    const auto idx = mu.grid.unflatten(c);
    const double share = mu.weights[c] / static_cast<double>(pieces);
    for (long p = 0; p < pieces; ++p) {
      long rem = p;
      Vec x(d);
      for (int i = d - 1; i >= 0; --i) {
        const long s = rem % sub;
        rem /= sub;
        x[i] = mu.grid.lo[i] + (idx[i] + (s + 0.5) / sub) * mu.grid.width(i);
      }
      const long t = target.locate(map(x));
      if (t >= 0) w[t] += share;
    }
  }
  return GridMeasure(target, w);
}

double ks_uniform(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::kInvalidArgument, "ks_uniform: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i], 0.0, 1.0);
    worst = std::max({worst, (i + 1) / n - v, v - i / n});
  }
  return worst;
}

}  // namespace flowlab
