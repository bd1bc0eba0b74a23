#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "flowlab/metrics.hpp"
#include "flowlab/numerics.hpp"
#include "flowlab/transport.hpp"
#include "support.hpp"

using namespace flowlab;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

GridMeasure correlated_gaussian(int cells, double rho) {
  const Grid g = Grid::cube(2, -4.0, 4.0, cells);
  return measure_from_density(g, [rho](const Vec& x) {
    const double q = (x[0] * x[0] - 2.0 * rho * x[0] * x[1] + x[1] * x[1]) / (1.0 - rho * rho);
    return std::exp(-0.5 * q);
  });
}

SampleSet mapped(const TriangularMap& t, const SampleSet& s) {
  SampleSet out{Mat(s.dim(), s.size()), s.seed};
  for (int k = 0; k < s.size(); ++k) out.points.col(k) = t.apply(s.points.col(k));
  return out;
}

double bump_kernel(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

// Continuous mollification of the unit step at x: the mass of the kernel on (-t, x).
double smoothed_step(double x, double t) {
  if (x <= -t) return 0.0;
  if (x >= t) return 1.0;
  const auto k = [t](double y) { return bump_kernel(y / t); };
  return adaptive_simpson(k, -t, x, 1e-13) / adaptive_simpson(k, -t, t, 1e-13);
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / (n - 1);
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i + 1 < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("uniform product measure maps to the identity") {
  const Grid g = Grid::cube(2, 0.0, 1.0, 64);
  const TriangularMap t = knothe_map(uniform_measure(g));
  double worst = 0.0;
  for (const Vec& x : testing::probes(3, 400, 2, 0.0, 1.0)) worst = std::max(worst, (t.apply(x) - x).cwiseAbs().maxCoeff());
  CHECK(worst <= 1.0 / 64);
  CHECK(t.floored_cells() == 0);
}

TEST_CASE("1-D truncated Gaussian matches the normal CDF") {
  const Grid g = Grid::cube(1, -4.0, 4.0, 512);
  const TriangularMap t = knothe_map(measure_from_density(g, [](const Vec& x) { return std::exp(-0.5 * x[0] * x[0]); }));
  const double lo = normal_cdf(-4.0), span = normal_cdf(4.0) - lo;
  double worst = 0.0;
  for (const double x : linspace(-4.0, 4.0, 2001)) {
    const double exact = (normal_cdf(x) - lo) / span;
    worst = std::max(worst, std::abs(t.apply(Vec::Constant(1, x))[0] - exact));
  }
  MESSAGE("max |T - Phi| = " << worst);
  CHECK(worst <= 2e-3);
}

TEST_CASE("2-D correlated Gaussian is pushed to uniform") {
  const GridMeasure mu = correlated_gaussian(64, 0.6);
  const TriangularMap t = knothe_map(mu);
  const SampleSet u = mapped(t, sample_measure(mu, 200000, 11));
  long dropped = 0;
  const Grid bins = Grid::cube(2, 0.0, 1.0, 32);
  const GridMeasure h = histogram(bins, u, &dropped);
  const double tv = tv_sup_a(h, uniform_measure(bins));
  MESSAGE("sup_A TV = " << tv << ", IPM TV = " << tv_ipm(h, uniform_measure(bins)));
  CHECK(dropped == 0);
  CHECK(tv <= 0.05);
}

TEST_CASE("KR pushes samples to uniform coordinatewise") {
  const GridMeasure mu = correlated_gaussian(48, -0.4);
  const TriangularMap t = knothe_map(mu);
  const SampleSet u = mapped(t, sample_measure(mu, 100000, 5));
  for (int i = 0; i < 2; ++i) {
    std::vector<double> col(u.size());
    for (int k = 0; k < u.size(); ++k) col[k] = u.points(i, k);
    const double ks = ks_uniform(col);
    MESSAGE("KS axis " << i << " = " << ks);
    CHECK(ks <= 0.02);
  }
}

TEST_CASE("KR Jacobian is upper triangular with nonnegative diagonal") {
  const Grid g = Grid::cube(3, -2.0, 2.0, 12);
  const GridMeasure mu = measure_from_density(g, [](const Vec& x) {
    return std::exp(-0.5 * x.squaredNorm()) * (1.2 + std::sin(x[0] * x[1] + x[2]));
  });
  const TriangularMap t = knothe_map(mu);
  double leak = 0.0;
  for (const Vec& x : testing::probes(9, 60, 3, -1.9, 1.9)) {
    const Mat j = fd_jacobian([&](const Vec& y) { return t.apply(y); }, x, 1e-6);
    for (int r = 0; r < 3; ++r) {
      CHECK(j(r, r) >= -1e-9);
      for (int c = 0; c < r; ++c) leak = std::max(leak, std::abs(j(r, c)));
    }
    const Vec y = t.apply(x);
    CHECK(((y.array() >= 0.0) && (y.array() <= 1.0)).all());
  }
  CHECK(leak <= 1e-6);
}

TEST_CASE("KR inverse round trip and floored cells") {
  const Grid g = Grid::cube(2, 0.0, 1.0, 20);
  Vec w = Vec::Ones(g.cells());
  for (long c = 0; c < g.cells(); ++c) {
    if (g.unflatten(c)[1] < 5) w[c] = 0.0;
  }
  const TriangularMap t = knothe_map(GridMeasure(g, w));
  CHECK(t.floored_cells() == 100);
  for (const Vec& x : testing::probes(4, 100, 2, 0.0, 1.0)) {
    if (x[1] < 0.26) continue;
    CHECK((t.inverse(t.apply(x)) - x).norm() <= 1e-9);
  }
  CHECK_THROWS_AS(knothe_map(uniform_measure(Grid::cube(4, 0.0, 1.0, 2))), Error);
}

TEST_CASE("mollify reproduces linear maps and smooths a step") {
  const Box box = Box::cube(1, -1.0, 1.0);
  const ScalarField lin = mollify(coordinate_field(1, 0), 0.1, box);
  for (const double x : linspace(-0.9, 0.9, 37)) CHECK(std::abs(lin(Vec::Constant(1, x)) - x) <= 1e-6);

  const ScalarField step = mollify(closure_field(1, [](const Vec& x) { return x[0] > 0.0 ? 1.0 : 0.0; }), 0.1, box);
  double worst = 0.0, prev = -1.0;
  for (const double x : linspace(-0.099, 0.099, 67)) {
    const double v = step(Vec::Constant(1, x));
    worst = std::max(worst, std::abs(v - smoothed_step(x, 0.1)));
    CHECK(v > prev);
    prev = v;
  }
  MESSAGE("step vs quadrature oracle: " << worst);
  CHECK(worst <= 2e-3);
  for (const double x : {-0.8, -0.3, -0.1, 0.1, 0.45, 0.9}) {
    CHECK(std::abs(step(Vec::Constant(1, x)) - (x > 0.0 ? 1.0 : 0.0)) <= 1e-12);
  }
}

TEST_CASE("mollified staircase is strictly increasing along the last axis") {
  const Box box = Box::cube(2, -1.0, 1.0);
  const ScalarField stairs = closure_field(2, [](const Vec& x) {
    return 0.05 * std::floor(x[1] / 0.05) + 0.3 * std::floor(4.0 * x[0]);
  });
  const ScalarField m = mollify(stairs, 0.1, box);
  for (const double x0 : {-0.7, 0.0, 0.55}) {
    double prev = -1e300;
    for (const double x1 : linspace(-1.0, 1.0, 100)) {
      const double v = m((Vec(2) << x0, x1).finished());
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("staircase with gaps wider than the kernel stays flat") {
  const Box box = Box::cube(1, -1.0, 1.0);
  const ScalarField m = mollify(closure_field(1, [](const Vec& x) { return std::floor(x[0] / 0.5); }), 0.1, box);
  CHECK(m(Vec::Constant(1, 0.2)) == m(Vec::Constant(1, 0.3)));
}

TEST_CASE("mollify preserves mass and commutes with translation") {
  const auto density = [](double u) { return bump_kernel(u) / 0.443993816168079; };
  const ScalarField tau = closure_field(1, [&](const Vec& x) { return density(x[0]); });
  const ScalarField m = mollify(tau, 0.2, Box::cube(1, -1.5, 1.5));
  const double before = trapezoid(density, -1.5, 1.5, 4001);
  const double after = trapezoid([&](double x) { return m(Vec::Constant(1, x)); }, -1.5, 1.5, 4001);
  CHECK(std::abs(before - after) <= 1e-8);

  const Box box = Box::cube(2, -1.0, 1.0);
  const auto f = [](const Vec& x) { return std::tanh(3.0 * x[1]) + 0.5 * x[0] * x[0]; };
  const Vec a = (Vec(2) << 0.13, -0.07).finished();
  const ScalarField base = mollify(closure_field(2, f), 0.15, box);
  const ScalarField moved = mollify(closure_field(2, [&](const Vec& x) { return f(x + a); }), 0.15, box);
  for (const Vec& x : testing::probes(8, 10, 2, -0.7, 0.7)) CHECK(std::abs(moved(x) - base(x + a)) <= 1e-6);
}

TEST_CASE("mollify rejects a kernel that leaves the domain") {
  ScalarField tau = coordinate_field(1, 0);
  tau.domain = Box::cube(1, -1.0, 1.0);
  CHECK_THROWS_AS(mollify(tau, 0.5, Box::cube(1, -0.8, 0.8)), Error);
  CHECK_NOTHROW(mollify(tau, 0.1, Box::cube(1, -0.8, 0.8)));
  CHECK_THROWS_AS(mollify(tau, 0.0, Box::cube(1, -0.8, 0.8)), Error);
}

TEST_CASE("identity Inn leaves samples unchanged") {
  const Inn id(2, {});
  const Sampler gauss = [](std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    return (Vec(2) << n(rng), n(rng)).finished();
  };
  const SampleSet a = pushforward_samples(id, gauss, 500, 21);
  std::mt19937_64 rng(21);
  for (int k = 0; k < a.size(); ++k) CHECK(a.points.col(k) == gauss(rng));
}

TEST_CASE("affine doubling halves the density") {
  const GridMeasure mu = uniform_measure(Grid::cube(1, 0.0, 1.0, 64));
  const Inn twice(1, {AffineLayer(2.0 * Mat::Identity(1, 1), Vec::Zero(1))});
  const Grid target = Grid::cube(1, 0.0, 2.0, 64);
  const PushforwardResult r = grid_pushforward(twice, mu, target);
  CHECK(r.failed_cells == 0);
  CHECK(r.raw_mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tv_ipm(r.measure, uniform_measure(target)) <= 1.0 / 64);
  CHECK(r.measure.density(Vec::Constant(1, 1.3)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ACF pushforward of a Gaussian agrees with Monte Carlo") {
  const GridMeasure mu = correlated_gaussian(96, 0.0);
  const Inn g(2, {single_coordinate_acf(2, coordinate_field(1, 0, 0.2), coordinate_field(1, 0, 0.5))});
  const Grid fine = Grid::cube(2, -6.0, 6.0, 120);
  const PushforwardResult r = grid_pushforward(g, mu, fine);
  MESSAGE("raw mass " << r.raw_mass << ", failed cells " << r.failed_cells);
  CHECK(std::abs(r.measure.weights.sum() - 1.0) <= 1e-6);
  CHECK(std::abs(r.raw_mass - 1.0) <= 1e-2);

  const GridMeasure coarse = coarsen(r.measure, 6);
  const GridMeasure mc = histogram(coarse.grid, pushforward_samples(g, sample_measure(mu, 100000, 17)));
  const double tv = tv_sup_a(coarse, mc);
  MESSAGE("sup_A TV vs Monte Carlo at 20^2 bins: " << tv);
  CHECK(tv <= 0.05);
}

TEST_CASE("map_pushforward of a translation shifts mass by whole cells") {
  const Grid g = Grid::cube(2, 0.0, 1.0, 10);
  std::mt19937_64 rng(2);
  Vec w = testing::random_matrix(rng, g.cells(), 1).cwiseAbs();
  const GridMeasure mu(g, w);
  const GridMeasure moved = map_pushforward([](const Vec& x) { return (x.array() + 0.1).matrix().eval(); }, mu,
                                            Grid::cube(2, 0.0, 1.1, 11), 3);
  for (long c = 0; c < g.cells(); ++c) {
    std::vector<int> idx = g.unflatten(c);
    for (int& i : idx) ++i;
    CHECK(moved.weights[moved.grid.flatten(idx)] == doctest::Approx(mu.weights[c]).epsilon(1e-12));
  }
}

TEST_CASE("ks_uniform on exact quantiles and a constant") {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back((i + 0.5) / 1000);
  CHECK(ks_uniform(v) == doctest::Approx(0.0005).epsilon(1e-9));
  CHECK(ks_uniform(std::vector<double>(10, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("measure files round trip inline and with a sidecar") {
  const auto dir = std::filesystem::temp_directory_path() / "flowlab_measure_io";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(6);
  for (const int cells : {8, 80}) {
    const Grid g = Grid::cube(2, -1.0, 1.0, cells);
    const GridMeasure mu(g, testing::random_matrix(rng, g.cells(), 1).cwiseAbs());
    const std::string path = (dir / ("m" + std::to_string(cells) + ".json")).string();
    save_measure(path, mu);
    CHECK(std::filesystem::exists(path + ".bin") == (g.cells() > 4096));
    const GridMeasure back = load_measure(path);
    CHECK(back.grid == g);
    CHECK((back.weights - mu.weights).cwiseAbs().maxCoeff() <= 1e-15);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("coarsen sums blocks") {
  const GridMeasure mu = uniform_measure(Grid::cube(2, 0.0, 1.0, 8));
  const GridMeasure c = coarsen(mu, 4);
  CHECK(c.grid.n == std::vector<int>{2, 2});
  CHECK(c.weights.isApproxToConstant(0.25, 1e-14));
  CHECK_THROWS_AS(coarsen(mu, 3), Error);
}
