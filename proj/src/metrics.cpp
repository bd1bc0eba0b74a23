#include "flowlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace flowlab {

namespace {

constexpr double kFlowEps = 1e-15;
constexpr double kZeroMass = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_grid(const GridMeasure& mu, const GridMeasure& nu, const char* where) {
  if (!(mu.grid == nu.grid)) fail(ErrorKind::kDimensionMismatch, std::string(where) + ": grids differ");
}

void require_budget(const GridMeasure& mu, long budget, const char* where) {
  if (mu.grid.cells() > budget) {
    fail(ErrorKind::kBudgetExceeded, std::string(where) + ": " + std::to_string(mu.grid.cells()) +
                                         " cells exceed the exact-mode budget of " +
                                         std::to_string(budget) + "; coarsen the grid");
  }
}

Mat centers(const Grid& g) {
  Mat pts(g.dim(), g.cells());
  for (long c = 0; c < g.cells(); ++c) pts.col(c) = g.center(c);
  return pts;
}

// Splits a signed mass vector into its positive and negative supports.
struct Split {
  std::vector<int> pos, neg;
  Vec supply, demand;
};

Split split(const Vec& a) {
  Split s;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) s.pos.push_back(static_cast<int>(i));
    if (a[i] < 0.0) s.neg.push_back(static_cast<int>(i));
  }
  s.supply.resize(static_cast<Eigen::Index>(s.pos.size()));
  s.demand.resize(static_cast<Eigen::Index>(s.neg.size()));
  for (std::size_t i = 0; i < s.pos.size(); ++i) s.supply[i] = a[s.pos[i]];
  for (std::size_t j = 0; j < s.neg.size(); ++j) s.demand[j] = -a[s.neg[j]];
  return s;
}

// Makes the two sides carry identical totals; the discrepancy is rounding.
void balance(Vec& supply, Vec& demand) {
  const double s = supply.sum(), t = demand.sum();
  if (s > 0.0 && t > 0.0) demand *= s / t;
}

}  // namespace

double tv_ipm(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu, nu, "tv_ipm");
  return (mu.weights - nu.weights).cwiseAbs().sum();
}

double tv_sup_a(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu, nu, "tv_sup_a");
  double s = 0.0;
  for (Eigen::Index c = 0; c < mu.weights.size(); ++c) s += std::max(0.0, mu.weights[c] - nu.weights[c]);
  return s;
}

// Successive shortest paths on the bipartite residual graph (supply side
// 0..p-1, demand side p..p+q-1) with Johnson potentials and dense Dijkstra.
double transport_cost(const Vec& supply_in, const Vec& demand_in,
                      const std::function<double(int, int)>& cost, std::vector<Shipment>* plan) {
  const int p = static_cast<int>(supply_in.size());
  const int q = static_cast<int>(demand_in.size());
  if (plan) plan->clear();
  if (p == 0 || q == 0) return 0.0;
  Vec supply = supply_in, demand = demand_in;
  balance(supply, demand);

  Mat c(p, q);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) c(i, j) = cost(i, j);
  }
  Mat flow = Mat::Zero(p, q);
  const int n = p + q;
  std::vector<double> pot(n, 0.0), dist(n);
  std::vector<int> prev(n);
  std::vector<char> done(n);

  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    bool any = false;
    for (int i = 0; i < p; ++i) {
      if (supply[i] > kFlowEps) {
        dist[i] = 0.0;
        any = true;
      }
    }
    if (!any) break;
    for (int iter = 0; iter < n; ++iter) {
      int u = -1;
      for (int v = 0; v < n; ++v) {
        if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
      }
      if (u < 0) break;
      done[u] = 1;
      if (u < p) {
        for (int j = 0; j < q; ++j) {
          const int v = p + j;
          if (done[v]) continue;
          const double nd = dist[u] + c(u, j) + pot[u] - pot[v];
          if (nd < dist[v]) {
            dist[v] = nd;
            prev[v] = u;
          }
        }
      } else {
        const int j = u - p;
        for (int i = 0; i < p; ++i) {
          if (done[i] || flow(i, j) <= kFlowEps) continue;
          const double nd = dist[u] - c(i, j) + pot[u] - pot[i];
          if (nd < dist[i]) {
            dist[i] = nd;
            prev[i] = u;
          }
        }
      }
    }
    int sink = -1;
    for (int j = 0; j < q; ++j) {
      if (demand[j] > kFlowEps && dist[p + j] < kInf && (sink < 0 || dist[p + j] < dist[sink])) {
        sink = p + j;
      }
    }
    if (sink < 0) break;
    const double reach = dist[sink];
    for (int v = 0; v < n; ++v) pot[v] += std::min(dist[v], reach);

    double amount = demand[sink - p];
    int v = sink;
    while (prev[v] >= 0) {
      const int u = prev[v];
      if (u >= p) amount = std::min(amount, flow(v, u - p));
      v = u;
    }
    amount = std::min(amount, supply[v]);
    supply[v] -= amount;
    demand[sink - p] -= amount;
    v = sink;
    while (prev[v] >= 0) {
      const int u = prev[v];
      if (u < p) {
        flow(u, v - p) += amount;
      } else {
        flow(v, u - p) -= amount;
      }
      v = u;
    }
  }

  double total = 0.0;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      if (flow(i, j) <= 0.0) continue;
      total += flow(i, j) * c(i, j);
      if (plan) plan->push_back({i, j, flow(i, j)});
    }
  }
  return total;
}

double w1_points(const Mat& points, const Vec& signed_mass) {
  require_dim(signed_mass.size(), points.cols(), "w1_points");
  const Split s = split(signed_mass);
  return transport_cost(s.supply, s.demand, [&](int i, int j) {
    return (points.col(s.pos[i]) - points.col(s.neg[j])).norm();
  });
}

// V(lam) = min_pi sum pi min((1 - lam) rho, 2 lam) is the value of the class
// {||f||_inf <= lam, Lip(f) <= 1 - lam}. V is concave and piecewise linear,
// and an optimal plan at lam_k gives a line through (lam_k, V(lam_k)) lying
// above V, so cutting planes reach the maximum in finitely many solves.
double dudley_points(const Mat& points, const Vec& signed_mass) {
  require_dim(signed_mass.size(), points.cols(), "dudley_points");
  const Split s = split(signed_mass);
  if (s.pos.empty() || s.neg.empty()) return 0.0;
  Mat rho(s.pos.size(), s.neg.size());
  for (std::size_t i = 0; i < s.pos.size(); ++i) {
    for (std::size_t j = 0; j < s.neg.size(); ++j) {
      rho(i, j) = (points.col(s.pos[i]) - points.col(s.neg[j])).norm();
    }
  }
  struct Line {
    double at, value, slope;
    double operator()(double lam) const { return value + slope * (lam - at); }
  };
  // Near 0 every unit teleports, near 1 every unit is transported.
  const double moved = s.supply.sum();
  const double w = transport_cost(s.supply, s.demand, [&](int i, int j) { return rho(i, j); });
  std::vector<Line> lines = {{0.0, 0.0, 2.0 * moved}, {1.0, 0.0, -w}};
  double best = 0.0;

  for (int it = 0; it < 200; ++it) {
    double arg = 0.0, top = kInf;
    for (const Line& l : lines) {
      for (const Line& r : lines) {
        if (!(l.slope > 0.0 && r.slope < 0.0)) continue;
        const double lam = std::clamp((r.value - l.value + l.slope * l.at - r.slope * r.at) / (l.slope - r.slope), 0.0, 1.0);
        double env = kInf;
        for (const Line& e : lines) env = std::min(env, e(lam));
        if (top == kInf || env > top) {
          top = env;
          arg = lam;
        }
      }
    }
    if (top == kInf || top - best <= 1e-13 * (1.0 + best)) break;
    std::vector<Shipment> plan;
    const double v = transport_cost(
        s.supply, s.demand, [&](int i, int j) { return std::min((1.0 - arg) * rho(i, j), 2.0 * arg); },
        &plan);
    double g = 0.0;
    for (const auto& sh : plan) {
      const double r = rho(sh.from, sh.to);
      g += (1.0 - arg) * r <= 2.0 * arg ? -sh.mass * r : 2.0 * sh.mass;
    }
    best = std::max(best, v);
    if (g == 0.0) break;
    lines.push_back({arg, v, g});
  }
  return best;
}

double w1(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu, nu, "w1");
  require_budget(mu, kW1CellBudget, "w1");
  if (mu.dim() == 1) {
    double acc = 0.0, gap = 0.0;
    for (Eigen::Index c = 0; c + 1 < mu.weights.size(); ++c) {
      gap += mu.weights[c] - nu.weights[c];
      acc += std::abs(gap);
    }
    return acc * mu.grid.width(0);
  }
  return w1_points(centers(mu.grid), mu.weights - nu.weights);
}

double dudley(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu, nu, "dudley");
  require_budget(mu, kDudleyCellBudget, "dudley");
  return dudley_points(centers(mu.grid), mu.weights - nu.weights);
}

Kernel Kernel::gaussian(double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::kInvalidArgument, "Kernel: gamma must be > 0");
  Kernel k;
  k.kind = Kind::kGaussian;
  k.gamma = gamma;
  k.psd_attested = true;
  return k;
}

Kernel Kernel::laplacian(double gamma) {
  Kernel k = gaussian(gamma);
  k.kind = Kind::kLaplacian;
  return k;
}

Kernel Kernel::custom_kernel(std::function<double(const Vec&, const Vec&)> fn, double sup_diag,
                             bool psd_attested) {
  Kernel k;
  k.kind = Kind::kCustom;
  k.custom = std::move(fn);
  k.sup_diag = sup_diag;
  k.psd_attested = psd_attested;
  return k;
}

double Kernel::operator()(const Vec& x, const Vec& y) const {
  switch (kind) {
    case Kind::kGaussian:
      return std::exp(-gamma * (x - y).squaredNorm());
    case Kind::kLaplacian:
      return std::exp(-gamma * (x - y).norm());
    case Kind::kCustom:
      return custom(x, y);
  }
  return 0.0;
}

std::string Kernel::name() const {
  switch (kind) {
    case Kind::kGaussian:
      return "gaussian";
    case Kind::kLaplacian:
      return "laplacian";
    case Kind::kCustom:
      return "custom";
  }
  return "";
}

double mmd_signed(const Mat& points, const Vec& a, const Kernel& k) {
  require_dim(a.size(), points.cols(), "mmd");
  if (k.kind == Kernel::Kind::kCustom && !k.psd_attested) {
    fail(ErrorKind::kInvalidArgument, "mmd: custom kernel without a PSD attestation");
  }
  std::vector<Eigen::Index> live;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0) live.push_back(i);
  }
  double q = 0.0;
  for (std::size_t u = 0; u < live.size(); ++u) {
    const Eigen::Index i = live[u];
    q += a[i] * a[i] * k(points.col(i), points.col(i));
    for (std::size_t v = u + 1; v < live.size(); ++v) {
      const Eigen::Index j = live[v];
      q += 2.0 * a[i] * a[j] * k(points.col(i), points.col(j));
    }
  }
  if (q < 0.0 && q >= -1e-12) q = 0.0;
  if (q < 0.0) fail(ErrorKind::kInvariantViolation, "mmd: negative quadratic form; kernel is not PSD");
  return std::sqrt(q);
}

double mmd(const SampleSet& x, const SampleSet& y, const Kernel& k) {
  require_dim(y.dim(), x.dim(), "mmd");
  if (x.size() == 0 || y.size() == 0) fail(ErrorKind::kInvalidArgument, "mmd: empty sample set");
  // Coincident points are merged so that equal weighted sets cancel exactly.
  std::map<std::vector<double>, double> mass;
  auto add = [&](const SampleSet& s, double w) {
    for (int c = 0; c < s.size(); ++c) {
      mass[std::vector<double>(s.points.col(c).data(), s.points.col(c).data() + s.dim())] += w;
    }
  };
  add(x, 1.0 / x.size());
  add(y, -1.0 / y.size());
  Mat pts(x.dim(), static_cast<Eigen::Index>(mass.size()));
  Vec a(pts.cols());
  Eigen::Index i = 0;
  for (const auto& [p, w] : mass) {
    pts.col(i) = Eigen::Map<const Vec>(p.data(), x.dim());
    a[i++] = w;
  }
  return mmd_signed(pts, a, k);
}

double mmd_grid(const GridMeasure& mu, const GridMeasure& nu, const Kernel& k) {
  require_same_grid(mu, nu, "mmd_grid");
  return mmd_signed(centers(mu.grid), mu.weights - nu.weights, k);
}

Truncation truncate(const GridMeasure& mu, const Box& k) {
  require_dim(k.dim(), mu.dim(), "truncate");
  Vec w = mu.weights;
  for (long c = 0; c < mu.grid.cells(); ++c) {
    if (!k.contains(mu.grid.center(c))) w[c] = 0.0;
  }
  Truncation t;
  t.mass = w.sum();
  if (t.mass > kZeroMass) t.measure = GridMeasure(mu.grid, w);
  return t;
}

bool CertificateReport::all_pass() const {
  return std::all_of(bounds.begin(), bounds.end(), [](const BoundCheck& b) { return b.pass; });
}

namespace {

BoundCheck check(std::string name, double lhs, double rhs) {
  BoundCheck b{std::move(name), lhs, rhs, rhs - lhs, true, true};
  b.pass = b.slack >= -kCertificateSlack;
  return b;
}

double support_hull_diameter(const GridMeasure& mu, const GridMeasure& nu) {
  const int d = mu.dim();
  Vec lo = Vec::Constant(d, kInf), hi = Vec::Constant(d, -kInf);
  for (long c = 0; c < mu.grid.cells(); ++c) {
    if (mu.weights[c] == 0.0 && nu.weights[c] == 0.0) continue;
    const Vec x = mu.grid.center(c);
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return (hi - lo).norm();
}

}  // namespace

CertificateReport certify_bounds(const GridMeasure& mu, const GridMeasure& nu, const Box& k,
                                 const Kernel& kernel) {
  CertificateReport r;
  r.tv = tv_ipm(mu, nu);
  r.tv_sup = tv_sup_a(mu, nu);
  r.w1 = w1(mu, nu);
  r.dudley = dudley(mu, nu);
  r.mmd = mmd_grid(mu, nu, kernel);
  r.support_diameter = support_hull_diameter(mu, nu);

  r.bounds.push_back(check("dudley_le_tv", r.dudley, r.tv));
  r.bounds.push_back(check("mmd_le_sqrt_supk_tv", r.mmd, std::sqrt(kernel.sup_diag) * r.tv));
  r.bounds.push_back(check("w1_le_diameter_tv_supA", r.w1, r.support_diameter * r.tv_sup));

  const Truncation tn = truncate(nu, k);
  BoundCheck truncated{"truncated_w1_le_tv_bound", 0.0, 0.0, 0.0, true, false};
  if (tn.measure && r.tv < tn.mass) {
    const Truncation tm = truncate(mu, k);
    if (tm.measure) {
      const double lhs = w1(*tm.measure, *tn.measure);
      const double rhs = 4.0 * k.diameter() / tn.mass * r.tv / (tn.mass - r.tv);
      truncated = check(truncated.name, lhs, rhs);
    }
  }
  r.bounds.push_back(truncated);
  return r;
}

Json to_json(const CertificateReport& r) {
  Json bounds = Json::array();
  for (const auto& b : r.bounds) {
    Json e = {{"name", b.name}, {"pass", b.pass}, {"hypothesis_met", b.hypothesis_met}};
    if (b.hypothesis_met) {
      e["lhs"] = b.lhs;
      e["rhs"] = b.rhs;
      e["slack"] = b.slack;
    } else {
      e["lhs"] = nullptr;
      e["rhs"] = nullptr;
      e["slack"] = nullptr;
    }
    bounds.push_back(e);
  }
  return {{"metrics",
           {{"tv_ipm", r.tv}, {"tv_supA", r.tv_sup}, {"w1", r.w1}, {"dudley", r.dudley}, {"mmd", r.mmd}}},
          {"support_diameter", r.support_diameter},
          {"bounds", bounds}};
}

}  // namespace flowlab
