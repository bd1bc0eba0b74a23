#include "flowlab/scalar_field.hpp"

#include <algorithm>
#include <cmath>

#include "flowlab/mlp.hpp"

namespace flowlab {

ScalarField constant_field(int arity, double value) {
  ScalarField f;
  f.arity = arity;
  f.eval = [value](const Vec&) { return value; };
  f.gradient = [arity](const Vec&) { return Vec::Zero(arity).eval(); };
  f.spec = {{"builtin", "constant"}, {"arity", arity}, {"params", {value}}};
  return f;
}

ScalarField linear_field(Vec weights, double bias) {
  ScalarField f;
  f.arity = static_cast<int>(weights.size());
  f.eval = [weights, bias](const Vec& x) { return weights.dot(x) + bias; };
  f.gradient = [weights](const Vec&) { return weights; };
  std::vector<double> params(weights.data(), weights.data() + weights.size());
  params.push_back(bias);
  f.spec = {{"builtin", "linear"}, {"arity", f.arity}, {"params", params}};
  return f;
}

ScalarField coordinate_field(int arity, int index, double scale, double bias) {
  if (index < 0 || index >= arity) {
    fail(ErrorKind::kInvalidArgument, "coordinate_field: index out of range");
  }
  Vec w = Vec::Zero(arity);
  w[index] = scale;
  return linear_field(std::move(w), bias);
}

ScalarField closure_field(int arity, std::function<double(const Vec&)> fn,
                          std::function<Vec(const Vec&)> grad) {
  ScalarField f;
  f.arity = arity;
  f.eval = std::move(fn);
  f.gradient = std::move(grad);
  return f;
}

Json to_json(const ScalarField& field) {
  if (!field.serializable()) {
    fail(ErrorKind::kNotSerializable, "scalar field is a closure and cannot be serialized");
  }
  return field.spec;
}

ScalarField scalar_field_from_json(const Json& j) {
  const std::string name = j.at("builtin").get<std::string>();
  const int arity = j.at("arity").get<int>();
  if (name == "constant") {
    return constant_field(arity, j.at("params").at(0).get<double>());
  }
  if (name == "linear") {
    const auto params = j.at("params").get<std::vector<double>>();
    if (static_cast<int>(params.size()) != arity + 1) {
      fail(ErrorKind::kInvalidArgument, "linear field: expected arity+1 params");
    }
    Vec w = Eigen::Map<const Vec>(params.data(), arity);
    return linear_field(w, params.back());
  }
  if (name == "mlp") {
    return as_scalar_field(mlp_from_json(j.at("net")));
  }
  fail(ErrorKind::kInvalidArgument, "unknown scalar field builtin '" + name + "'");
}

double gradient_fd_error(const ScalarField& field, std::span<const Vec> probes, double step) {
  if (!field.has_gradient()) {
    fail(ErrorKind::kInvalidArgument, "gradient_fd_error: field has no analytic gradient");
  }
  double worst = 0.0;
  for (const Vec& x : probes) {
    const Vec g = field.gradient(x);
    Vec xp = x;
    for (int i = 0; i < field.arity; ++i) {
      xp[i] = x[i] + step;
      const double fp = field.eval(xp);
      xp[i] = x[i] - step;
      const double fm = field.eval(xp);
      xp[i] = x[i];
      const double fd = (fp - fm) / (2.0 * step);
      worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

}  // namespace flowlab
