#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flowlab/sobolev.hpp"
#include "support.hpp"

using namespace flowlab;

namespace {

SmoothMap closure(int d, std::function<Vec(const Vec&)> fn) { return {d, std::move(fn), {}}; }

SmoothMap wobble(double a) {
  return closure(2, [a](const Vec& x) {
    return (Vec(2) << x[0] + a * std::sin(3.0 * x[1]), x[1] + a * x[0] * x[0]).finished();
  });
}

SeminormSpec spec(Box k, int r, double p, int n = 33) {
  SeminormSpec s;
  s.k = std::move(k);
  s.r = r;
  s.p = p;
  s.resolution = n;
  return s;
}

}  // namespace

TEST_CASE("seminorm examples") {
  const Box unit = Box::cube(1, 0.0, 1.0);
  CHECK(seminorm_diff(identity_map(2), identity_map(2), spec(Box::cube(2, -1.0, 1.0), 1, kSupNorm)) == 0.0);

  const Vec c = (Vec(2) << 0.3, -0.4).finished();
  CHECK(seminorm_diff(linear_map(Mat::Identity(2, 2), c), identity_map(2), spec(Box::cube(2, -1.0, 1.0), 0, kSupNorm)) ==
        doctest::Approx(0.5).epsilon(1e-14));

  const SmoothMap twice = linear_map(2.0 * Mat::Identity(1, 1), Vec::Zero(1));
  CHECK(seminorm_diff(twice, identity_map(1), spec(unit, 1, kSupNorm)) == doctest::Approx(2.0).epsilon(1e-14));
  const SmoothMap twice_fd = closure(1, [](const Vec& x) { return (2.0 * x).eval(); });
  const SmoothMap id_fd = closure(1, [](const Vec& x) { return x; });
  CHECK(seminorm_diff(twice_fd, id_fd, spec(unit, 1, kSupNorm)) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("integral branches") {
  const Box unit = Box::cube(1, 0.0, 1.0);
  const SmoothMap twice = linear_map(2.0 * Mat::Identity(1, 1), Vec::Zero(1));
  CHECK(seminorm_diff(twice, identity_map(1), spec(unit, 0, 1.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(seminorm_diff(twice, identity_map(1), spec(unit, 0, 2.0, 201)) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-4));
  CHECK(seminorm_diff(twice, identity_map(1), spec(unit, 1, 1.0)) == doctest::Approx(1.5).epsilon(1e-12));
  // On [0,2]^2 the constant gap (1, 1) integrates to |K| sqrt(2).
  const SmoothMap shifted = linear_map(Mat::Identity(2, 2), Vec::Ones(2));
  CHECK(seminorm_diff(shifted, identity_map(2), spec(Box::cube(2, 0.0, 2.0), 1, 1.0)) ==
        doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("monotone in r and K") {
  const Box small = Box::cube(2, -0.5, 0.5), big = Box::cube(2, -1.0, 1.0);
  const SmoothMap f = wobble(0.2), g = wobble(-0.1);
  for (const double p : {1.0, 2.0, kSupNorm}) {
    const double s0 = seminorm_diff(f, g, spec(small, 0, p)), s1 = seminorm_diff(f, g, spec(small, 1, p));
    CHECK(s0 <= s1);
    if (p == kSupNorm) {
      // Node grids of nested boxes are not nested; the big box uses a refinement that contains the small one.
      CHECK(s1 <= seminorm_diff(f, g, spec(big, 1, p, 65)));
    } else {
      CHECK(s1 <= seminorm_diff(f, g, spec(big, 1, p)) + 1e-12);
    }
  }
}

TEST_CASE("sup dominates the normalized integral") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    const Box k = Box::cube(2, 0.0, 1.0);
    const double sup = seminorm_diff(wobble(a), identity_map(2), spec(k, 0, kSupNorm));
    const double mean = seminorm_diff(wobble(a), identity_map(2), spec(k, 0, 1.0));
    CHECK(mean <= sup + 1e-12);
  }
}

TEST_CASE("argument checks and evaluation failures") {
  const Box unit = Box::cube(1, 0.0, 1.0);
  CHECK_THROWS_AS(seminorm_diff(identity_map(1), identity_map(1), spec(unit, 2, 1.0)), Error);
  CHECK_THROWS_AS(seminorm_diff(identity_map(1), identity_map(1), spec(unit, 0, 3.0)), Error);
  CHECK_THROWS_AS(seminorm_diff(identity_map(1), identity_map(1), spec(unit, 0, 1.0, 4)), Error);
  CHECK_THROWS_AS(seminorm_diff(identity_map(2), identity_map(2), spec(unit, 0, 1.0)), Error);
  SeminormSpec coarse_step = spec(unit, 1, kSupNorm);
  coarse_step.h = 0.01;
  CHECK_THROWS_AS(seminorm_diff(identity_map(1), identity_map(1), coarse_step), Error);

  const SmoothMap bad = closure(1, [](const Vec& x) {
    if (x[0] > 0.5) fail(ErrorKind::kSaturation, "out of range");
    return x;
  });
  try {
    seminorm_diff(bad, identity_map(1), spec(unit, 0, kSupNorm));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSaturation);
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
  CHECK(seminorm(linear_map(Mat::Identity(1, 1), Vec::Constant(1, 2.0)), spec(unit, 1, kSupNorm)) ==
        doctest::Approx(3.0));
}
