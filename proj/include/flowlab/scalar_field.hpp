#pragma once

#include <functional>
#include <optional>
#include <span>

#include "flowlab/core.hpp"
#include "json.hpp"

namespace flowlab {

using Json = nlohmann::json;

/// A real-valued function of `arity` reals, used as a coupling conditioner.
///
/// `spec` names a builtin (constant/linear/mlp) with its parameters; closures
/// carry a null spec and cannot be serialized. `domain`, when set, bounds the
/// region where `eval` may be called. Handles must be pure.
struct ScalarField {
  int arity = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> gradient;
  Json spec;
  std::optional<Box> domain;

  double operator()(const Vec& x) const { return eval(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool serializable() const { return !spec.is_null(); }
};

ScalarField constant_field(int arity, double value);

/// x -> w . x + bias
ScalarField linear_field(Vec weights, double bias = 0.0);

/// x -> scale * x_index + bias
ScalarField coordinate_field(int arity, int index, double scale = 1.0, double bias = 0.0);

ScalarField closure_field(int arity, std::function<double(const Vec&)> fn,
                          std::function<Vec(const Vec&)> grad = {});

Json to_json(const ScalarField& field);
ScalarField scalar_field_from_json(const Json& j);

/// Checks an analytic gradient against central differences on the probes.
/// Returns the worst relative error max|g - g_fd| / max(1, |g_fd|).
double gradient_fd_error(const ScalarField& field, std::span<const Vec> probes,
                         double step = 1e-5);

}  // namespace flowlab
