#include <cmath>

#include "common.hpp"
#include "flowlab/decompose.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/tolerances.hpp"

namespace flowlab {

namespace {

// Each factor conjugated into a last-coordinate map, applied F_d first.
SmoothMap rebuilt(const Factorization& fz, int d) {
  std::vector<SmoothMap> wrapped;
  for (const auto& f : fz.factors) wrapped.push_back(as_last_coordinate_map(f, d));
  return {d,
          [wrapped](const Vec& x) {
            Vec y = x;
            for (auto it = wrapped.rbegin(); it != wrapped.rend(); ++it) y = (*it)(y);
            return y;
          },
          {}};
}

double sup_gap(const SmoothMap& a, const std::function<Vec(const Vec&)>& b, const Box& box, int n) {
  double worst = 0.0;
  for_each_node(box, n, [&](const Vec& x) { worst = std::max(worst, (a(x) - b(x)).cwiseAbs().maxCoeff()); });
  return worst;
}

}  // namespace

Report exp_triangular(const Config& c, std::uint64_t) {
  const double t = c.get_double("t", 1.0 / 64);
  const double t_far = c.get_double("t_far", 1.0);
  const int grid = c.get_int("grid", 41);
  const double r_in = c.get_double("r_in", 0.5), r_out = c.get_double("r_out", 1.5);
  const double speed = c.get_double("speed", 2.0);
  const double tol = c.get_double("tol", 1e-9);
  const int d = 2;
  const Box box = Box::cube(d, -r_out, r_out);
  const Mat a = speed * (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished();
  const FlowHandle phi = rotation_flow(a, r_in, r_out);

  Report r;

  const Factorization id = triangular_factorize(identity_map(d), box, tol, grid);
  double id_shift = 0.0;
  for_each_node(box, 9, [&](const Vec& x) {
    for (const auto& f : id.factors) id_shift = std::max(id_shift, std::abs(f.h(x) - x[f.index]));
  });
  const double id_err = sup_gap(rebuilt(id, d), [](const Vec& x) { return x; }, box, grid);
  r.results["identity"] = {{"factor_shift", id_shift}, {"recomposition_error", id_err}};
  r.checks.push_back(check_le("identity_factors_trivial", id_shift, 1e-12));
  r.checks.push_back(check_le("identity_recomposition", id_err, 1e-12));

  const SmoothMap near = phi.at(t);
  const NearIdResult near_check = near_id_check(near, box, grid);
  const Factorization fz = triangular_factorize(near, box, tol, grid);
  const double near_err = sup_gap(rebuilt(fz, d), [&](const Vec& x) { return phi(x, t); }, box, grid);
  r.results["near"] = {{"t", t}, {"near_id_op_norm", near_check.max_op_norm}, {"factorization", to_json(fz)},
                       {"recomposition_error", near_err}};
  r.checks.push_back(check_eq("near_input_is_near_identity", near_check.ok ? 1.0 : 0.0, 1.0));
  r.checks.push_back(check_le("near_recomposition", near_err, tol::kTriangularRecomposition));

  const NearIdResult far_check = near_id_check(phi.at(t_far), box, grid);
  const FlowHandle scaled{d, [phi, t_far](const Vec& x, double s) { return phi(x, s * t_far); }, phi.support, {}};
  const SplitSearch split = split_until_near_id(scaled, box, grid);
  // The pieces are identical maps, so one factorization serves all of them.
  const Factorization piece = triangular_factorize(split.pieces.front(), box, tol, grid);
  const SmoothMap one = rebuilt(piece, d);
  const int n = split.n;
  const SmoothMap chained{d,
                          [one, n](const Vec& x) {
                            Vec y = x;
                            for (int i = 0; i < n; ++i) y = one(y);
                            return y;
                          },
                          {}};
  const double far_err = sup_gap(chained, [&](const Vec& x) { return phi(x, t_far); }, box, grid);
  r.results["far"] = {{"t", t_far},
                      {"near_id_op_norm", far_check.max_op_norm},
                      {"pieces", n},
                      {"piece_op_norm", split.max_op_norm},
                      {"piece_recomposition_error", piece.recomposition_error},
                      {"recomposition_error", far_err}};
  r.checks.push_back(check_eq("far_input_fails_near_identity", far_check.ok ? 0.0 : 1.0, 1.0));
  r.checks.push_back(check_le("far_recomposition_after_split", far_err, tol::kTriangularRecomposition));
  return r;
}

}  // namespace flowlab
