#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "flowlab/decompose.hpp"
#include "flowlab/numerics.hpp"
#include "support.hpp"

using namespace flowlab;

namespace {

double pulse(double u) { return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; }

SmoothMap bump_warp(double eps) {
  return {2,
          [eps](const Vec& x) {
            const double b = eps * pulse(x[0]) * pulse(x[1]);
            return (Vec(2) << x[0] + b, x[1] + b).finished();
          },
          {}};
}

Mat rot2() { return (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished(); }

}  // namespace

TEST_CASE("near_id_check examples") {
  const Box box = Box::cube(2, -1.0, 1.0);
  const NearIdResult id = near_id_check(identity_map(2), box, 5);
  CHECK(id.ok);
  CHECK(id.max_op_norm == 0.0);

  const NearIdResult twice = near_id_check(linear_map(2.0 * Mat::Identity(2, 2), Vec::Zero(2)), box, 5);
  CHECK_FALSE(twice.ok);
  CHECK(twice.max_op_norm == doctest::Approx(1.0).epsilon(1e-12));

  const SmoothMap wave{2, [](const Vec& x) {
                         return (Vec(2) << x[0], x[1] + 0.3 * std::sin(x[0])).finished();
                       },
                       {}};
  const Box wide = Box::cube(2, -2.0, 2.0);
  double oracle = 0.0;
  for_each_node(wide, 9, [&](const Vec& x) { oracle = std::max(oracle, std::abs(0.3 * std::cos(x[0]))); });
  const NearIdResult w = near_id_check(wave, wide, 9);
  CHECK(w.ok);
  CHECK(w.max_op_norm == doctest::Approx(oracle).epsilon(1e-6));
  CHECK_THROWS_AS(near_id_check(wave, wide, 1), Error);
}

TEST_CASE("trailing minors") {
  CHECK(trailing_minors_nonzero(Mat::Identity(3, 3)));
  const Mat swap = (Mat(2, 2) << 0, 1, 1, 0).finished();
  CHECK_FALSE(trailing_minors_nonzero(swap));
  CHECK(first_vanishing_trailing_minor(swap) == 1);
  Mat m(3, 3);
  m << 1, 2, 3, 4, 1, 1, 5, 1, 1;
  CHECK(first_vanishing_trailing_minor(m) == 2);
}

TEST_CASE("near-identity matrices have nonzero trailing minors") {
  std::mt19937_64 rng(1);
  int failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const int d = 2 + k % 4;
    const Mat j = shaped_near_identity(rng, d, 0.999);
    REQUIRE(op_norm(j - Mat::Identity(d, d)) < 1.0);
    if (!trailing_minors_nonzero(j)) ++failures;
  }
  CHECK(failures == 0);

  std::mt19937_64 rng2(2);
  const Mat j = shaped_near_identity(rng2, 3, 0.9);
  CHECK(op_norm(j - Mat::Identity(3, 3)) < 0.9);
  CHECK(trailing_minors_nonzero(j));
}

TEST_CASE("flow endpoint split") {
  const FlowHandle rot = rotation_flow(2.0 * rot2(), 0.5, 1.5);
  const Box box = Box::cube(2, -1.5, 1.5);

  const auto one = flow_endpoint_split(rot, 1);
  REQUIRE(one.size() == 1);
  for (const Vec& x : testing::probes(3, 20, 2, -1.5, 1.5)) CHECK(one[0](x) == rot(x, 1.0));

  const auto pieces = flow_endpoint_split(rot, 64);
  CHECK(pieces.size() == 64);
  CHECK(near_id_check(pieces[0], box, 21).ok);
  CHECK_FALSE(near_id_check(rot.at(1.0), box, 21).ok);

  const SplitSearch s = split_until_near_id(rot, box, 21);
  CHECK(s.ok);
  CHECK(s.n > 1);
  CHECK(s.n < 64);
  CHECK(near_id_check(s.pieces[0], box, 21).ok);
  CHECK_FALSE(near_id_check(rot.at(2.0 / s.n), box, 21).ok);

  const SmoothMap whole = compose_all(pieces);
  for (const Vec& x : testing::probes(4, 50, 2, -1.5, 1.5)) {
    CHECK((whole(x) - rot(x, 1.0)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("ode split pieces match a finer RK4 reference") {
  const VectorField field = rotation_field(2.0 * rot2(), 0.5, 1.5);
  const FlowHandle flow = ode_flow(field, Box::cube(2, -1.5, 1.5), 256);
  const SplitSearch s = split_until_near_id(flow, flow.support, 11);
  REQUIRE(s.ok);
  const SmoothMap whole = compose_all(s.pieces);
  for (const Vec& x : testing::probes(5, 30, 2, -1.5, 1.5)) {
    const Vec fine = integrate(field, x, 1.0, 2560);
    CHECK((whole(x) - fine).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("split search reports the cap") {
  const FlowHandle fast = rotation_flow(5000.0 * rot2(), 0.5, 1.5);
  try {
    split_until_near_id(fast, Box::cube(2, -1.5, 1.5), 11, 8);
    FAIL("expected budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBudgetExceeded);
  }
}

TEST_CASE("triangular factorization of a single-coordinate map") {
  const SmoothMap f{2, [](const Vec& x) {
                      return (Vec(2) << x[0], x[1] + 0.3 * std::tanh(x[0] + x[1])).finished();
                    },
                    {}};
  const Factorization fz = triangular_factorize(f, Box::cube(2, -1.0, 1.0), 1e-10, 11);
  CHECK(fz.recomposition_error <= 1e-10);
  for (const Vec& x : testing::probes(6, 10, 2, -1.0, 1.0)) {
    CHECK(std::abs(fz.factors[0].h(x) - x[0]) <= 1e-9);
  }
}

TEST_CASE("triangular factorization of a diagonal linear map") {
  const Mat a = (Mat(2, 2) << 2, 0, 0, 3).finished();
  const Factorization fz = triangular_factorize(linear_map(a, Vec::Zero(2)), Box::cube(2, -1.0, 1.0), 1e-12, 11);
  CHECK(fz.recomposition_error <= 1e-10);
  const Vec x = (Vec(2) << 0.3, -0.7).finished();
  CHECK(fz.factors[0].h(x) == doctest::Approx(0.6));
  CHECK(fz.factors[1].h(x) == doctest::Approx(-2.1));
  CHECK(fz.factors[0].direction == 1);
  CHECK(fz.factors[1].direction == 1);
  CHECK((fz.factors[1].invert(fz.factors[1].apply(x)) - x).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("decreasing factors are detected") {
  const Mat a = (Mat(2, 2) << 2, 1, 0, -3).finished();
  const Factorization fz = triangular_factorize(linear_map(a, Vec::Zero(2)), Box::cube(2, -1.0, 1.0), 1e-12, 11);
  CHECK(fz.factors[1].direction == -1);
  CHECK(fz.recomposition_error <= 1e-10);
}

TEST_CASE("compactly supported warp") {
  const SmoothMap f = bump_warp(0.2);
  const Box box = Box::cube(2, -1.2, 1.2);
  const Factorization fz = triangular_factorize(f, box, 1e-8, 41);
  CHECK(fz.recomposition_error <= 1e-7);
  CHECK(fz.monotone_sweeps_ok);
  const Json j = to_json(fz);
  CHECK(j.at("factors").size() == 2);
  CHECK(j.at("grid").at("n").get<int>() == 41);

  const SmoothMap last = as_last_coordinate_map(fz.factors[0], 2);
  const Vec x = (Vec(2) << 0.2, 0.1).finished();
  CHECK((last(x) - fz.factors[0].apply(x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("three-dimensional factorization") {
  const SmoothMap f{3, [](const Vec& x) {
                      const double b = 0.15 * pulse(x[0]) * pulse(x[1]) * pulse(x[2]);
                      return (Vec(3) << x[0] + b, x[1] - b, x[2] + b).finished();
                    },
                    {}};
  const Factorization fz = triangular_factorize(f, Box::cube(3, -1.1, 1.1), 1e-9, 7, 5);
  CHECK(fz.recomposition_error <= 1e-8);
}

TEST_CASE("vanishing minor is reported with its location") {
  const Mat swap = (Mat(2, 2) << 0, 1, 1, 0).finished();
  try {
    triangular_factorize(linear_map(swap, Vec::Zero(2)), Box::cube(2, -1.0, 1.0), 1e-8);
    FAIL("expected hypothesis error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kHypothesis);
    CHECK(std::string(e.what()).find("1x1") != std::string::npos);
  }
}
