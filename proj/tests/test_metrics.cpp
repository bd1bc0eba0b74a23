#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "flowlab/metrics.hpp"
#include "flowlab/numerics.hpp"
#include "lp_oracle.hpp"
#include "support.hpp"

using namespace flowlab;

namespace {

GridMeasure random_measure(std::mt19937_64& rng, const Grid& g, double sparsity = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec w(g.cells());
  for (long c = 0; c < g.cells(); ++c) w[c] = u(rng) < sparsity ? 0.0 : u(rng);
  if (w.sum() == 0.0) w[0] = 1.0;
  return GridMeasure(g, w);
}

GridMeasure point_mass(const Grid& g, long cell) {
  Vec w = Vec::Zero(g.cells());
  w[cell] = 1.0;
  return GridMeasure(g, w);
}

Mat centers(const Grid& g) {
  Mat p(g.dim(), g.cells());
  for (long c = 0; c < g.cells(); ++c) p.col(c) = g.center(c);
  return p;
}

}  // namespace

TEST_CASE("tv examples and the convention lock") {
  const Grid g = Grid::cube(1, 0.0, 1.5, 30);
  const GridMeasure a = measure_from_density(g, [](const Vec& x) { return x[0] < 1.0 ? 1.0 : 0.0; });
  const GridMeasure b = measure_from_density(g, [](const Vec& x) { return x[0] > 0.5 ? 1.0 : 0.0; });
  CHECK(tv_ipm(a, a) == 0.0);
  CHECK(std::abs(tv_ipm(a, b) - 1.0) <= 2.0 / 20);
  CHECK(tv_ipm(point_mass(g, 0), point_mass(g, 29)) == doctest::Approx(2.0));
  CHECK(tv_sup_a(point_mass(g, 0), point_mass(g, 29)) == doctest::Approx(1.0));

  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const Grid h = Grid::cube(2, 0.0, 1.0, 5);
    const GridMeasure p = random_measure(rng, h), q = random_measure(rng, h);
    CHECK(std::abs(tv_ipm(p, q) - 2.0 * tv_sup_a(p, q)) <= 1e-14);
  }
  CHECK_THROWS_AS(tv_ipm(a, uniform_measure(Grid::cube(1, 0.0, 1.0, 30))), Error);
}

TEST_CASE("w1 examples") {
  const Grid line(Vec::Constant(1, -0.5), Vec::Constant(1, 1.5), {2});
  CHECK(w1(point_mass(line, 0), point_mass(line, 0)) == 0.0);
  CHECK(w1(point_mass(line, 0), point_mass(line, 1)) == doctest::Approx(1.0).epsilon(1e-14));

  const Grid sq(Vec::Constant(2, -0.5), Vec::Constant(2, 1.5), {2, 2});
  Vec a = Vec::Zero(4), b = Vec::Zero(4);
  a[sq.flatten({0, 0})] = a[sq.flatten({1, 0})] = 0.5;
  b[sq.flatten({0, 1})] = b[sq.flatten({1, 1})] = 0.5;
  const GridMeasure mu(sq, a), nu(sq, b);
  // The 2x2 transport polytope is one segment: pi(00->01) = s, pi(00->11) = 1/2 - s, ...
  double brute = 1e300;
  for (const double s : linspace(0.0, 0.5, 501)) {
    brute = std::min(brute, 2.0 * s * 1.0 + 2.0 * (0.5 - s) * std::sqrt(2.0));
  }
  CHECK(w1(mu, nu) == doctest::Approx(brute).epsilon(1e-12));
  CHECK(w1(mu, nu) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("w1 in 1-D matches the flow solver") {
  std::mt19937_64 rng(2);
  const Grid g = Grid::cube(1, -1.0, 3.0, 40);
  for (int k = 0; k < 20; ++k) {
    const GridMeasure p = random_measure(rng, g), q = random_measure(rng, g);
    CHECK(w1(p, q) == doctest::Approx(w1_points(centers(g), p.weights - q.weights)).epsilon(1e-10));
  }
}

TEST_CASE("dudley of two point masses ten apart") {
  const Grid line(Vec::Constant(1, -5.0), Vec::Constant(1, 15.0), {2});
  const GridMeasure a = point_mass(line, 0), b = point_mass(line, 1);
  const double oracle = testing::dudley_oracle(centers(line), a.weights - b.weights);
  CHECK(oracle == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(dudley(a, b) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(dudley(a, a) == 0.0);
}

TEST_CASE("w1 and dudley agree with the LP oracle on small supports") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> spread(-2.0, 2.0);
  for (int trial = 0; trial < 24; ++trial) {
    const int k = 2 + trial % 3;
    const int d = 1 + trial % 2;
    Mat pts(d, k);
    for (int i = 0; i < k; ++i) {
      for (int r = 0; r < d; ++r) pts(r, i) = spread(rng);
    }
    Vec p(k), q(k);
    for (int i = 0; i < k; ++i) {
      p[i] = u(rng);
      q[i] = u(rng);
    }
    const Vec a = p / p.sum() - q / q.sum();
    CHECK(w1_points(pts, a) == doctest::Approx(testing::w1_oracle(pts, a)).epsilon(1e-9));
    CHECK(dudley_points(pts, a) == doctest::Approx(testing::dudley_oracle(pts, a)).epsilon(1e-9));
  }
}

TEST_CASE("grid measures on at most four cells match the oracle") {
  std::mt19937_64 rng(4);
  const Grid g = Grid::cube(2, 0.0, 3.0, 6);
  std::uniform_int_distribution<long> cell(0, g.cells() - 1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<long> support;
    while (support.size() < 4) {
      const long c = cell(rng);
      if (std::find(support.begin(), support.end(), c) == support.end()) support.push_back(c);
    }
    Vec a = Vec::Zero(g.cells()), b = Vec::Zero(g.cells());
    for (const long c : support) {
      a[c] = u(rng);
      b[c] = u(rng);
    }
    const GridMeasure mu(g, a), nu(g, b);
    Mat pts(2, 4);
    Vec signed_mass(4);
    for (int i = 0; i < 4; ++i) {
      pts.col(i) = g.center(support[i]);
      signed_mass[i] = mu.weights[support[i]] - nu.weights[support[i]];
    }
    CHECK(w1(mu, nu) == doctest::Approx(testing::w1_oracle(pts, signed_mass)).epsilon(1e-9));
    CHECK(dudley(mu, nu) == doctest::Approx(testing::dudley_oracle(pts, signed_mass)).epsilon(1e-9));
  }
}

TEST_CASE("dudley and mmd are dominated by tv") {
  std::mt19937_64 rng(5);
  const Kernel k = Kernel::gaussian(2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Grid g = Grid::cube(1 + trial % 2, -1.0, 1.0, trial % 2 ? 7 : 30);
    const GridMeasure p = random_measure(rng, g), q = random_measure(rng, g);
    const double tv = tv_ipm(p, q);
    CHECK(dudley(p, q) <= tv + 1e-9);
    CHECK(mmd_grid(p, q, k) <= std::sqrt(k.sup_diag) * tv + 1e-9);
  }
}

TEST_CASE("w1 is bounded by diameter times sup_A tv") {
  std::mt19937_64 rng(6);
  const Grid g = Grid::cube(2, 0.0, std::sqrt(2.0), 8);
  const Box k = Box::cube(2, 0.0, std::sqrt(2.0));
  REQUIRE(k.diameter() == doctest::Approx(2.0));
  for (int trial = 0; trial < 50; ++trial) {
    const GridMeasure p = random_measure(rng, g), q = random_measure(rng, g);
    CHECK(w1(p, q) <= k.diameter() * tv_sup_a(p, q) + 1e-9);
  }
}

TEST_CASE("metric axioms") {
  std::mt19937_64 rng(7);
  const Grid g = Grid::cube(2, -1.0, 1.0, 6);
  const Kernel k = Kernel::laplacian(1.5);
  const std::vector<std::function<double(const GridMeasure&, const GridMeasure&)>> metrics = {
      tv_ipm, w1, dudley, [&](const GridMeasure& a, const GridMeasure& b) { return mmd_grid(a, b, k); }};
  for (int trial = 0; trial < 50; ++trial) {
    const GridMeasure p = random_measure(rng, g), q = random_measure(rng, g), r = random_measure(rng, g);
    for (const auto& m : metrics) {
      const double pq = m(p, q);
      CHECK(std::abs(pq - m(q, p)) <= 1e-12);
      CHECK(std::abs(m(p, p)) <= 1e-9);
      CHECK(pq > 0.0);
      CHECK(pq <= m(p, r) + m(r, q) + 1e-9);
    }
  }
}

TEST_CASE("mmd closed form and sample sets") {
  const Grid line(Vec::Constant(1, -0.5), Vec::Constant(1, 1.8), {2});
  const double r = 2.3 / 2.0;
  const Kernel k = Kernel::gaussian(0.7);
  const double m = mmd_grid(point_mass(line, 0), point_mass(line, 1), k);
  CHECK(m * m == doctest::Approx(2.0 - 2.0 * std::exp(-0.7 * r * r)).epsilon(1e-12));

  std::mt19937_64 rng(8);
  const SampleSet x{testing::random_matrix(rng, 2, 50), 8};
  CHECK(mmd(x, x, k) == 0.0);
  SampleSet y = x;
  y.points.array() += 0.3;
  CHECK(mmd(x, y, k) > 0.0);

  const auto dot = [](const Vec& a, const Vec& b) { return a.dot(b); };
  CHECK_THROWS_AS(mmd(x, y, Kernel::custom_kernel(dot, 1.0, false)), Error);
  CHECK(mmd(x, y, Kernel::custom_kernel(dot, 1.0, true)) ==
        doctest::Approx((x.points.rowwise().mean() - y.points.rowwise().mean()).norm()).epsilon(1e-9));
  CHECK_THROWS_AS(Kernel::gaussian(0.0), Error);
}

TEST_CASE("truncation") {
  const Grid g = Grid::cube(2, 0.0, 1.0, 10);
  const GridMeasure u = uniform_measure(g);
  const Truncation all = truncate(u, Box::cube(2, -1.0, 2.0));
  REQUIRE(all.measure);
  CHECK(all.mass == doctest::Approx(1.0));
  CHECK((all.measure->weights - u.weights).cwiseAbs().maxCoeff() <= 1e-15);

  const Truncation none = truncate(u, Box::cube(2, 3.0, 4.0));
  CHECK_FALSE(none.measure);
  CHECK(none.mass == 0.0);

  const Truncation half = truncate(u, Box(Vec::Zero(2), (Vec(2) << 0.5, 1.0).finished()));
  REQUIRE(half.measure);
  CHECK(half.mass == doctest::Approx(0.5));
  for (long c = 0; c < g.cells(); ++c) {
    CHECK(half.measure->weights[c] == doctest::Approx(g.center(c)[0] < 0.5 ? 1.0 / 50 : 0.0));
  }
}

TEST_CASE("certificate on identical measures") {
  const Grid g = Grid::cube(2, -1.0, 1.0, 8);
  std::mt19937_64 rng(9);
  const GridMeasure p = random_measure(rng, g, 0.0);
  const CertificateReport r = certify_bounds(p, p, Box::cube(2, -0.5, 0.5), Kernel::gaussian(1.0));
  CHECK(r.all_pass());
  REQUIRE(r.bounds.size() == 4);
  for (const auto& b : r.bounds) {
    CHECK(b.hypothesis_met);
    CHECK(b.slack == doctest::Approx(b.rhs));
    CHECK(b.rhs >= 0.0);
  }
  const Json j = to_json(r);
  for (const char* key : {"tv_ipm", "tv_supA", "w1", "dudley", "mmd"}) CHECK(j["metrics"].contains(key));
  for (const char* key : {"name", "lhs", "rhs", "slack", "pass", "hypothesis_met"}) {
    CHECK(j["bounds"][0].contains(key));
  }
}

TEST_CASE("certificate on random pairs") {
  std::mt19937_64 rng(10);
  const Grid g = Grid::cube(2, -1.0, 1.0, 10);
  const Box k = Box::cube(2, -0.6, 0.6);
  int truncated_checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const GridMeasure p = random_measure(rng, g, 0.0);
    Vec w = p.weights;
    for (long c = 0; c < w.size(); ++c) w[c] *= 1.0 + 0.2 * std::sin(3.0 * c + trial);
    const GridMeasure q(g, w);
    const CertificateReport r = certify_bounds(p, q, k, Kernel::gaussian(3.0));
    CHECK(r.all_pass());
    truncated_checked += r.bounds[3].hypothesis_met;
  }
  CHECK(truncated_checked == 30);

  const GridMeasure far = point_mass(g, 0);
  const CertificateReport unmet = certify_bounds(far, uniform_measure(g), k, Kernel::gaussian(1.0));
  CHECK_FALSE(unmet.bounds[3].hypothesis_met);
  CHECK(unmet.bounds[3].pass);
  CHECK(to_json(unmet)["bounds"][3]["slack"].is_null());
}

TEST_CASE("cell budgets") {
  const Grid big = Grid::cube(2, 0.0, 1.0, 65);
  const GridMeasure u = uniform_measure(big);
  CHECK_THROWS_AS(w1(u, u), Error);
  const Grid mid = Grid::cube(2, 0.0, 1.0, 46);
  CHECK_THROWS_AS(dudley(uniform_measure(mid), uniform_measure(mid)), Error);
  CHECK_NOTHROW(w1(uniform_measure(mid), uniform_measure(mid)));
}
