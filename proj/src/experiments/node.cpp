#include <cmath>
#include <limits>
#include <random>

#include "common.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/mlp.hpp"
#include "flowlab/node.hpp"
#include "flowlab/numerics.hpp"

namespace flowlab {

namespace {

struct Pair {
  std::string kind;
  VectorField big;
  VectorField small;
  Box k;
};

Mat skew2() { return (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished(); }

VectorField plus(const VectorField& f, std::function<Vec(const Vec&)> g, double extra_lip) {
  return closure_vector_field(f.dim, [e = f.eval, g = std::move(g)](const Vec& x) { return (e(x) + g(x)).eval(); },
                              f.lip + extra_lip);
}

Pair random_pair(int index, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double eps = std::pow(10.0, -1.0 - 2.0 * (0.5 * (u(rng) + 1.0)));
  const Box k2 = Box::cube(2, -1.0, 1.0);
  switch (index % 4) {
    case 0: {
      Mat a(2, 2);
      a << u(rng), u(rng), u(rng), u(rng);
      a *= 0.5;
      const VectorField f = linear_vector_field(a, (Vec(2) << u(rng), u(rng)).finished() * 0.2);
      return {"linear_plus_wave", f,
              plus(f, [eps](const Vec& x) { return (Vec(2) << eps * std::sin(x[1]), eps * std::cos(x[0])).finished(); }, eps),
              k2};
    }
    case 1: {
      const VectorField f = rotation_field((1.0 + u(rng)) * skew2(), 0.5, 1.5);
      const double angle = M_PI * u(rng);
      const Vec shift = eps * (Vec(2) << std::cos(angle), std::sin(angle)).finished();
      return {"rotation_plus_constant", f, plus(f, [shift](const Vec&) { return shift; }, 0.0), k2};
    }
    case 2: {
      const VectorField f = bump_field_1d(2.0 + u(rng));
      return {"scaled_bump", f, plus(f, [e = f.eval, eps](const Vec& x) { return (eps * e(x)).eval(); }, eps * f.lip),
              Box::cube(1, -1.0, 1.0)};
    }
    default: {
      Mat a(2, 2), b(2, 2);
      a << u(rng), u(rng), u(rng), u(rng);
      b << u(rng), u(rng), u(rng), u(rng);
      a *= 0.5;
      const VectorField f = linear_vector_field(a, Vec::Zero(2));
      return {"linear_perturbed", f, linear_vector_field(a + eps * b, Vec::Zero(2)), k2};
    }
  }
}

}  // namespace

Report exp_node(const Config& c, std::uint64_t seed) {
  const int pairs = c.get_int("pairs", 20);
  const int n_probe = c.get_int("n_probe", 16);
  const int epochs = c.get_int("epochs", 3000);
  if (pairs < 3) fail(ErrorKind::kInvalidArgument, "node: need at least 3 pairs");
  std::mt19937_64 rng(seed);

  std::vector<Pair> all;
  const VectorField rot = rotation_field(skew2(), 0.5, 1.5);
  all.push_back({"identical", rot, rot, Box::cube(2, -1.0, 1.0)});
  all.push_back({"constant_shift", zero_field(2), constant_vector_field((Vec(2) << 0.03, -0.04).finished()),
                 Box::cube(2, -1.0, 1.0)});
  {
    const VectorField big = bump_field_1d();
    const ScalarField target = closure_field(1, [big](const Vec& x) { return big(x)[0]; });
    MlpFitOptions opts;
    opts.widths = {1, 16, 1};
    opts.epochs = epochs;
    opts.seed = seed;
    const Box k = Box::cube(1, -1.0, 1.0);
    const Mlp net = mlp_fit(target, k.inflated(2.0 * std::exp(big.lip)), opts).net;
    all.push_back({"mlp_fit_of_bump", big,
                   closure_vector_field(1, [net](const Vec& x) { return Vec::Constant(1, mlp_eval(net, x)); },
                                        mlp_lipschitz_bound(net)),
                   k});
  }
  for (int i = 0; static_cast<int>(all.size()) < pairs; ++i) all.push_back(random_pair(i, rng));

  Report r;
  nlohmann::json rows = nlohmann::json::array();
  int passed = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < all.size(); ++i) {
    const GronwallReport g = gronwall_certificate(all[i].big, all[i].small, all[i].k, n_probe, seed + i);
    nlohmann::json j = to_json(g);
    j["kind"] = all[i].kind;
    rows.push_back(j);
    passed += g.pass;
    worst_slack = std::min(worst_slack, g.slack);
    r.csv_rows.push_back({static_cast<double>(i), g.delta, g.bound, g.measured});
    if (all[i].kind == "identical") r.checks.push_back(check_eq("identical_fields_measured", g.measured, 0.0));
    if (all[i].kind == "constant_shift") {
      r.checks.push_back(check_le("constant_shift_measured_is_delta", std::abs(g.measured - g.delta), 1e-12));
    }
  }
  r.results = {{"pairs", rows}, {"passed", passed}, {"total", static_cast<int>(all.size())}, {"worst_slack", worst_slack}};
  r.checks.push_back(check_eq("certificates_pass", passed, static_cast<double>(all.size())));
  r.csv_header = {"pair", "delta", "bound", "measured"};
  return r;
}

}  // namespace flowlab
