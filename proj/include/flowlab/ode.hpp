#pragma once

#include <functional>
#include <optional>
#include <random>

#include "flowlab/core.hpp"
#include "json.hpp"

namespace flowlab {

using Json = nlohmann::json;

/// Autonomous vector field R^d -> R^d with a caller-declared Lipschitz bound.
struct VectorField {
  int dim = 0;
  std::function<Vec(const Vec&)> eval;
  double lip = 0.0;
  std::optional<double> support_radius;
  Json spec;  // builtin description, null for closures

  Vec operator()(const Vec& x) const { return eval(x); }
};

VectorField zero_field(int dim);
VectorField constant_vector_field(Vec c);
/// x -> A x + b, lip = ||A||_op.
VectorField linear_vector_field(Mat a, Vec b);
VectorField closure_vector_field(int dim, std::function<Vec(const Vec&)> fn, double lip,
                                 std::optional<double> support_radius = std::nullopt);
/// x -> -f(x); same Lipschitz bound and support.
VectorField negated(const VectorField& f);

Json to_json(const VectorField& f);
VectorField vector_field_from_json(const Json& j);

/// Largest ||f(x)-f(y)|| / ||x-y|| over random pairs drawn uniformly in `box`.
double empirical_lipschitz(const VectorField& f, const Box& box, int pairs, std::mt19937_64& rng);

/// Classic fixed-step RK4 from x over time T (T may be negative).
/// Throws kNonFinite if the state blows up.
Vec integrate(const VectorField& field, const Vec& x, double horizon, int steps);

/// RK4 on the augmented system (z, log det) with d/dt log det = div f(z).
/// The divergence uses central differences with step `fd_step`.
std::pair<Vec, double> integrate_with_log_det(const VectorField& field, const Vec& x,
                                              double horizon, int steps,
                                              double fd_step = 1e-5);

/// Flow layer x -> z(T) for dz/dt = f(z), z(0) = x.
struct OdeFlowLayer {
  VectorField field;
  double horizon = 1.0;
  int steps_per_unit = 256;

  int dim() const { return field.dim; }
  int steps() const;
};

Vec ode_forward(const OdeFlowLayer& layer, const Vec& x);
/// Integrates -f over the same horizon; exact time reversal for autonomous fields.
Vec ode_inverse(const OdeFlowLayer& layer, const Vec& y);
double ode_log_det(const OdeFlowLayer& layer, const Vec& x);

}  // namespace flowlab
