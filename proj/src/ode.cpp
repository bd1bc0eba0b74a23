#include "flowlab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowlab/numerics.hpp"

namespace flowlab {

VectorField zero_field(int dim) {
  VectorField f;
  f.dim = dim;
  f.eval = [dim](const Vec&) { return Vec::Zero(dim).eval(); };
  f.lip = 0.0;
  f.support_radius = 0.0;
  f.spec = {{"builtin", "zero"}, {"dim", dim}};
  return f;
}

VectorField constant_vector_field(Vec c) {
  VectorField f;
  f.dim = static_cast<int>(c.size());
  f.spec = {{"builtin", "constant"},
            {"dim", f.dim},
            {"params", std::vector<double>(c.data(), c.data() + c.size())}};
  f.eval = [c = std::move(c)](const Vec&) { return c; };
  f.lip = 0.0;
  return f;
}

VectorField linear_vector_field(Mat a, Vec b) {
  require_dim(a.rows(), a.cols(), "linear_vector_field");
  require_dim(b.size(), a.rows(), "linear_vector_field");
  VectorField f;
  f.dim = static_cast<int>(a.rows());
  std::vector<double> params;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) params.push_back(a(r, c));
  }
  for (Eigen::Index i = 0; i < b.size(); ++i) params.push_back(b[i]);
  f.spec = {{"builtin", "linear"}, {"dim", f.dim}, {"params", params}};
  f.lip = op_norm(a);
  f.eval = [a = std::move(a), b = std::move(b)](const Vec& x) { return (a * x + b).eval(); };
  return f;
}

VectorField closure_vector_field(int dim, std::function<Vec(const Vec&)> fn, double lip,
                                 std::optional<double> support_radius) {
  VectorField f;
  f.dim = dim;
  f.eval = std::move(fn);
  f.lip = lip;
  f.support_radius = support_radius;
  return f;
}

VectorField negated(const VectorField& f) {
  VectorField g = f;
  g.eval = [inner = f.eval](const Vec& x) { return (-inner(x)).eval(); };
  if (!f.spec.is_null()) g.spec = {{"builtin", "negated"}, {"of", f.spec}};
  return g;
}

Json to_json(const VectorField& f) {
  if (f.spec.is_null()) {
    fail(ErrorKind::kNotSerializable, "vector field is a closure and cannot be serialized");
  }
  return f.spec;
}

VectorField vector_field_from_json(const Json& j) {
  const std::string name = j.at("builtin").get<std::string>();
  if (name == "negated") return negated(vector_field_from_json(j.at("of")));
  const int dim = j.at("dim").get<int>();
  if (name == "zero") return zero_field(dim);
  const auto params = j.at("params").get<std::vector<double>>();
  if (name == "constant") {
    require_dim(static_cast<Eigen::Index>(params.size()), dim, "constant vector field");
    return constant_vector_field(Eigen::Map<const Vec>(params.data(), dim));
  }
  if (name == "linear") {
    require_dim(static_cast<Eigen::Index>(params.size()), dim * dim + dim, "linear vector field");
    Mat a(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) a(r, c) = params[r * dim + c];
    }
    return linear_vector_field(a, Eigen::Map<const Vec>(params.data() + dim * dim, dim));
  }
  fail(ErrorKind::kInvalidArgument, "unknown vector field builtin '" + name + "'");
}

double empirical_lipschitz(const VectorField& f, const Box& box, int pairs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&]() {
    Vec x(box.dim());
    for (int i = 0; i < box.dim(); ++i) x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
    return x;
  };
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Vec x = draw();
    const Vec y = draw();
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    worst = std::max(worst, (f.eval(x) - f.eval(y)).norm() / dist);
  }
  return worst;
}

Vec integrate(const VectorField& field, const Vec& x, double horizon, int steps) {
  require_dim(x.size(), field.dim, "integrate");
  if (steps < 1) fail(ErrorKind::kInvalidArgument, "integrate: steps must be >= 1");
  const double h = horizon / steps;
  Vec z = x;
  for (int s = 0; s < steps; ++s) {
    const Vec k1 = field.eval(z);
    const Vec k2 = field.eval(z + 0.5 * h * k1);
    const Vec k3 = field.eval(z + 0.5 * h * k2);
    const Vec k4 = field.eval(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) {
      fail(ErrorKind::kNonFinite, "integrate: non-finite state at step " + std::to_string(s));
    }
  }
  return z;
}

namespace {

double divergence(const VectorField& f, const Vec& z, double step) {
  double div = 0.0;
  Vec zp = z;
  for (int i = 0; i < f.dim; ++i) {
    zp[i] = z[i] + step;
    const double fp = f.eval(zp)[i];
    zp[i] = z[i] - step;
    const double fm = f.eval(zp)[i];
    zp[i] = z[i];
    div += (fp - fm) / (2.0 * step);
  }
  return div;
}

}  // namespace

std::pair<Vec, double> integrate_with_log_det(const VectorField& field, const Vec& x,
                                              double horizon, int steps, double fd_step) {
  require_dim(x.size(), field.dim, "integrate_with_log_det");
  if (steps < 1) fail(ErrorKind::kInvalidArgument, "integrate: steps must be >= 1");
  const double h = horizon / steps;
  Vec z = x;
  double ld = 0.0;
  for (int s = 0; s < steps; ++s) {
    const Vec k1 = field.eval(z);
    const double l1 = divergence(field, z, fd_step);
    const Vec k2 = field.eval(z + 0.5 * h * k1);
    const double l2 = divergence(field, z + 0.5 * h * k1, fd_step);
    const Vec k3 = field.eval(z + 0.5 * h * k2);
    const double l3 = divergence(field, z + 0.5 * h * k2, fd_step);
    const Vec k4 = field.eval(z + h * k3);
    const double l4 = divergence(field, z + h * k3, fd_step);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ld += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    if (!z.allFinite() || !std::isfinite(ld)) {
      fail(ErrorKind::kNonFinite, "integrate_with_log_det: non-finite state");
    }
  }
  return {z, ld};
}

int OdeFlowLayer::steps() const {
  return std::max(1, static_cast<int>(std::ceil(std::abs(horizon) * steps_per_unit - 1e-9)));
}

Vec ode_forward(const OdeFlowLayer& layer, const Vec& x) {
  return integrate(layer.field, x, layer.horizon, layer.steps());
}

Vec ode_inverse(const OdeFlowLayer& layer, const Vec& y) {
  return integrate(negated(layer.field), y, layer.horizon, layer.steps());
}

double ode_log_det(const OdeFlowLayer& layer, const Vec& x) {
  return integrate_with_log_det(layer.field, x, layer.horizon, layer.steps()).second;
}

}  // namespace flowlab
