#include "flowlab/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "flowlab/numerics.hpp"

namespace flowlab {

namespace {

constexpr double kDetThreshold = 1e-12;
constexpr double kWeightSumTol = 1e-9;
constexpr double kInverseTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_handles(const std::vector<ScalarField>& hs, int arity, const char* what) {
  for (const auto& h : hs) {
    if (h.arity != arity) {
      fail(ErrorKind::kDimensionMismatch,
           std::string(what) + ": conditioner arity " + std::to_string(h.arity) +
               " does not match " + std::to_string(arity));
    }
  }
}

void validate(const AcfLayer& l) {
  if (l.split < 1 || l.split >= l.dim) {
    fail(ErrorKind::kInvalidArgument, "AcfLayer: split must lie in [1, d-1]");
  }
  const auto rest = static_cast<std::size_t>(l.dim - l.split);
  if (l.scale.size() != rest || l.shift.size() != rest) {
    fail(ErrorKind::kDimensionMismatch, "AcfLayer: need d-k scale and shift handles");
  }
  check_handles(l.scale, l.split, "AcfLayer");
  check_handles(l.shift, l.split, "AcfLayer");
}

// ---- ACF -------------------------------------------------------------------

Vec acf_forward(const AcfLayer& l, const Vec& x) {
  validate(l);
  const Vec head = x.head(l.split);
  Vec y = x;
  for (int i = 0; i < l.dim - l.split; ++i) {
    y[l.split + i] = x[l.split + i] * std::exp(l.scale[i](head)) + l.shift[i](head);
  }
  return y;
}

Vec acf_inverse(const AcfLayer& l, const Vec& y) {
  validate(l);
  const Vec head = y.head(l.split);
  Vec x = y;
  for (int i = 0; i < l.dim - l.split; ++i) {
    x[l.split + i] = (y[l.split + i] - l.shift[i](head)) * std::exp(-l.scale[i](head));
  }
  return x;
}

double acf_log_det(const AcfLayer& l, const Vec& x) {
  validate(l);
  const Vec head = x.head(l.split);
  double sum = 0.0;
  for (const auto& s : l.scale) sum += s(head);
  return sum;
}

bool is_builtin(const ScalarField& f, const char* name) {
  return f.spec.is_object() && f.spec.value("builtin", "") == name;
}

AcfLayer acf_inverse_layer(const AcfLayer& l) {
  validate(l);
  AcfLayer inv{l.dim, l.split, {}, {}};
  for (int i = 0; i < l.dim - l.split; ++i) {
    const ScalarField& s = l.scale[i];
    const ScalarField& t = l.shift[i];
    if (is_builtin(s, "constant") && (is_builtin(t, "constant") || is_builtin(t, "linear"))) {
      const double c = s.spec["params"][0].get<double>();
      const double factor = -std::exp(-c);
      inv.scale.push_back(constant_field(l.split, -c));
      const auto params = t.spec["params"].get<std::vector<double>>();
      if (is_builtin(t, "constant")) {
        inv.shift.push_back(constant_field(l.split, factor * params[0]));
      } else {
        Vec w = Eigen::Map<const Vec>(params.data(), l.split) * factor;
        inv.shift.push_back(linear_field(w, factor * params.back()));
      }
      continue;
    }
    inv.scale.push_back(closure_field(l.split, [s](const Vec& h) { return -s(h); }));
    inv.shift.push_back(closure_field(
        l.split, [s, t](const Vec& h) { return -t(h) * std::exp(-s(h)); }));
  }
  return inv;
}

// ---- DSF -------------------------------------------------------------------

struct DsfParams {
  Vec log_w;
  Vec b;
  Vec tau;
};

void validate(const DsfLayer& l) {
  if (l.dim < 1 || l.components < 1) fail(ErrorKind::kInvalidArgument, "DsfLayer: empty layer");
  const auto d = static_cast<std::size_t>(l.dim);
  if (l.weight.size() != d || l.bias.size() != d || l.temperature.size() != d) {
    fail(ErrorKind::kDimensionMismatch, "DsfLayer: need one conditioner set per coordinate");
  }
  for (int c = 0; c < l.dim; ++c) {
    const auto n = static_cast<std::size_t>(l.components);
    if (l.weight[c].size() != n || l.bias[c].size() != n || l.temperature[c].size() != n) {
      fail(ErrorKind::kDimensionMismatch, "DsfLayer: conditioner count != components");
    }
    check_handles(l.weight[c], c, "DsfLayer");
    check_handles(l.bias[c], c, "DsfLayer");
    check_handles(l.temperature[c], c, "DsfLayer");
  }
}

DsfParams dsf_params(const DsfLayer& l, int c, const Vec& prefix) {
  const int n = l.components;
  DsfParams p{Vec(n), Vec(n), Vec(n)};
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = l.weight[c][j](prefix);
    if (!(w > 0.0)) {
      fail(ErrorKind::kInvalidArgument, "DsfLayer: weight must be positive");
    }
    sum += w;
    p.log_w[j] = std::log(w);
    p.b[j] = l.bias[c][j](prefix);
    p.tau[j] = l.temperature[c][j](prefix);
    if (!(p.tau[j] > 0.0)) {
      fail(ErrorKind::kInvalidArgument, "DsfLayer: temperature must be positive");
    }
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    fail(ErrorKind::kInvalidArgument,
         "DsfLayer: weights sum to " + std::to_string(sum) + ", expected 1");
  }
  return p;
}

struct DsfValue {
  double value;
  double log_slope;
};

// The inner mixture S and its complement 1 - S are accumulated separately in
// log space, so logit(S) = log S - log(1 - S) keeps full precision in both tails.
DsfValue dsf_scalar(const DsfParams& p, double x) {
  const Eigen::Index n = p.b.size();
  Vec lo(n), hi(n), sl(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double z = (x - p.b[j]) / p.tau[j];
    const double ls = log_sigmoid(z);
    const double lc = log_sigmoid(-z);
    lo[j] = p.log_w[j] + ls;
    hi[j] = p.log_w[j] + lc;
    sl[j] = p.log_w[j] + ls + lc - std::log(p.tau[j]);
  }
  const double log_s = log_sum_exp(lo);
  const double log_c = log_sum_exp(hi);
  const DsfValue v{log_s - log_c, log_sum_exp(sl) - log_s - log_c};
  if (!std::isfinite(log_s) || !std::isfinite(log_c) || !std::isfinite(v.value) ||
      !std::isfinite(v.log_slope)) {
    fail(ErrorKind::kSaturation, "DsfLayer: sigmoid mixture saturated at 0 or 1");
  }
  return v;
}

Vec dsf_forward(const DsfLayer& l, const Vec& x) {
  validate(l);
  Vec y(l.dim);
  for (int c = 0; c < l.dim; ++c) {
    y[c] = dsf_scalar(dsf_params(l, c, x.head(c)), x[c]).value;
  }
  return y;
}

Vec dsf_inverse(const DsfLayer& l, const Vec& y) {
  validate(l);
  Vec x(l.dim);
  for (int c = 0; c < l.dim; ++c) {
    const DsfParams p = dsf_params(l, c, x.head(c));
    const ScalarFn g = [&p](double v) { return dsf_scalar(p, v).value; };
    const ScalarFn dg = [&p](double v) { return std::exp(dsf_scalar(p, v).log_slope); };
    // Far from the data g behaves like (x - b_j) / tau_j, so this range is a
    // reasonable first bracket for any conditioning value.
    const Vec guess = (p.b.array() + p.tau.array() * y[c]).matrix();
    x[c] = solve_monotone(g, &dg, y[c], guess.minCoeff() - 1.0, guess.maxCoeff() + 1.0, true,
                          {kInverseTol, 60, 400});
  }
  return x;
}

double dsf_log_det(const DsfLayer& l, const Vec& x) {
  validate(l);
  double sum = 0.0;
  for (int c = 0; c < l.dim; ++c) {
    sum += dsf_scalar(dsf_params(l, c, x.head(c)), x[c]).log_slope;
  }
  return sum;
}

// ---- SoS -------------------------------------------------------------------

void validate(const SosLayer& l) {
  if (l.dim < 2) fail(ErrorKind::kInvalidArgument, "SosLayer: dimension must be >= 2");
  if (l.coeffs.empty()) fail(ErrorKind::kInvalidArgument, "SosLayer: need at least h_0");
  if (l.offset.arity != l.dim - 1) {
    fail(ErrorKind::kDimensionMismatch, "SosLayer: offset arity must be d-1");
  }
  check_handles(l.coeffs, l.dim - 1, "SosLayer");
}

// Coefficients of (sum_l a_l u^l)^2 by self-convolution.
Vec squared_poly(const Vec& a) {
  Vec q = Vec::Zero(2 * a.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < a.size(); ++j) q[i + j] += a[i] * a[j];
  }
  return q;
}

double horner(const Vec& c, double u) {
  double acc = 0.0;
  for (Eigen::Index i = c.size() - 1; i >= 0; --i) acc = acc * u + c[i];
  return acc;
}

struct SosPoly {
  double offset;
  Vec base;     // h_l
  Vec squared;  // coefficients of the integrand
};

SosPoly sos_poly(const SosLayer& l, const Vec& x) {
  const Vec head = x.head(l.dim - 1);
  SosPoly p{l.offset(head), Vec(l.coeffs.size()), {}};
  for (std::size_t i = 0; i < l.coeffs.size(); ++i) p.base[i] = l.coeffs[i](head);
  p.squared = squared_poly(p.base);
  return p;
}

double sos_transform(const SosPoly& p, double z) {
  // Antiderivative sum_m q_m z^{m+1} / (m+1), evaluated by Horner in z.
  double acc = 0.0;
  for (Eigen::Index m = p.squared.size() - 1; m >= 0; --m) {
    acc = acc * z + p.squared[m] / static_cast<double>(m + 1);
  }
  return p.offset + acc * z;
}

Vec sos_forward(const SosLayer& l, const Vec& x) {
  validate(l);
  Vec y = x;
  y[l.dim - 1] = sos_transform(sos_poly(l, x), x[l.dim - 1]);
  return y;
}

Vec sos_inverse(const SosLayer& l, const Vec& y) {
  validate(l);
  const SosPoly p = sos_poly(l, y);
  if (p.base.cwiseAbs().maxCoeff() == 0.0) {
    fail(ErrorKind::kInvariantViolation, "SosLayer: coefficient polynomial vanishes identically");
  }
  const double target = y[l.dim - 1];
  const ScalarFn g = [&p](double z) { return sos_transform(p, z); };
  const ScalarFn dg = [&p](double z) { return horner(p.squared, z); };
  const double r = 1.0 + std::abs(target - p.offset);
  Vec x = y;
  x[l.dim - 1] = solve_monotone(g, &dg, target, -r, r, true, {kInverseTol, 60, 400});
  return x;
}

double sos_log_det(const SosLayer& l, const Vec& x) {
  validate(l);
  const SosPoly p = sos_poly(l, x);
  const double slope = horner(p.squared, x[l.dim - 1]);
  if (!(slope > 0.0)) {
    fail(ErrorKind::kInvariantViolation, "SosLayer: zero derivative, log-det undefined");
  }
  return std::log(slope);
}

// ---- Permutation / Affine ---------------------------------------------------

Vec perm_forward(const PermutationLayer& l, const Vec& x) {
  Vec y(x.size());
  for (int i = 0; i < l.dim(); ++i) y[i] = x[l.perm[i]];
  return y;
}

Vec perm_inverse(const PermutationLayer& l, const Vec& y) {
  Vec x(y.size());
  for (int i = 0; i < l.dim(); ++i) x[l.perm[i]] = y[i];
  return x;
}

PermutationLayer perm_inverse_layer(const PermutationLayer& l) {
  std::vector<int> inv(l.perm.size());
  for (int i = 0; i < l.dim(); ++i) inv[l.perm[i]] = i;
  return PermutationLayer(std::move(inv));
}

}  // namespace

AcfLayer single_coordinate_acf(int dim, ScalarField scale, ScalarField shift) {
  AcfLayer l{dim, dim - 1, {std::move(scale)}, {std::move(shift)}};
  validate(l);
  return l;
}

DsfLayer constant_dsf(int dim, const Vec& w, const Vec& b, const Vec& tau) {
  const int n = static_cast<int>(w.size());
  if (b.size() != n || tau.size() != n) {
    fail(ErrorKind::kDimensionMismatch, "constant_dsf: w, b, tau must have equal length");
  }
  DsfLayer l;
  l.dim = dim;
  l.components = n;
  l.weight.resize(dim);
  l.bias.resize(dim);
  l.temperature.resize(dim);
  for (int c = 0; c < dim; ++c) {
    for (int j = 0; j < n; ++j) {
      l.weight[c].push_back(constant_field(c, w[j]));
      l.bias[c].push_back(constant_field(c, b[j]));
      l.temperature[c].push_back(constant_field(c, tau[j]));
    }
  }
  return l;
}

PermutationLayer::PermutationLayer(std::vector<int> p) : perm(std::move(p)) {
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    if (sorted[i] != i) fail(ErrorKind::kInvalidArgument, "PermutationLayer: not a bijection");
  }
  if (perm.empty()) fail(ErrorKind::kInvalidArgument, "PermutationLayer: empty permutation");
}

PermutationLayer transposition(int dim, int i, int j) {
  std::vector<int> p(dim);
  std::iota(p.begin(), p.end(), 0);
  std::swap(p.at(i), p.at(j));
  return PermutationLayer(std::move(p));
}

AffineLayer::AffineLayer(Mat a, Vec b) : matrix(std::move(a)), offset(std::move(b)) {
  require_dim(matrix.cols(), matrix.rows(), "AffineLayer");
  require_dim(offset.size(), matrix.rows(), "AffineLayer");
  lu.compute(matrix);
  const double det = lu.determinant();
  if (!(std::abs(det) > kDetThreshold)) {
    fail(ErrorKind::kSingular, "AffineLayer: |det A| <= 1e-12");
  }
  log_abs_det = std::log(std::abs(det));
}

int layer_dim(const Layer& layer) {
  return std::visit(Overloaded{[](const AcfLayer& l) { return l.dim; },
                               [](const DsfLayer& l) { return l.dim; },
                               [](const SosLayer& l) { return l.dim; },
                               [](const PermutationLayer& l) { return l.dim(); },
                               [](const AffineLayer& l) { return l.dim(); },
                               [](const OdeFlowLayer& l) { return l.dim(); }},
                    layer);
}

const char* layer_kind(const Layer& layer) {
  return std::visit(Overloaded{[](const AcfLayer&) { return "acf"; },
                               [](const DsfLayer&) { return "dsf"; },
                               [](const SosLayer&) { return "sos"; },
                               [](const PermutationLayer&) { return "permutation"; },
                               [](const AffineLayer&) { return "affine"; },
                               [](const OdeFlowLayer&) { return "ode_flow"; }},
                    layer);
}

Vec layer_forward(const Layer& layer, const Vec& x) {
  require_dim(x.size(), layer_dim(layer), "layer_forward");
  return std::visit(
      Overloaded{[&](const AcfLayer& l) { return acf_forward(l, x); },
                 [&](const DsfLayer& l) { return dsf_forward(l, x); },
                 [&](const SosLayer& l) { return sos_forward(l, x); },
                 [&](const PermutationLayer& l) { return perm_forward(l, x); },
                 [&](const AffineLayer& l) { return (l.matrix * x + l.offset).eval(); },
                 [&](const OdeFlowLayer& l) { return ode_forward(l, x); }},
      layer);
}

Vec layer_inverse(const Layer& layer, const Vec& y) {
  require_dim(y.size(), layer_dim(layer), "layer_inverse");
  return std::visit(
      Overloaded{[&](const AcfLayer& l) { return acf_inverse(l, y); },
                 [&](const DsfLayer& l) { return dsf_inverse(l, y); },
                 [&](const SosLayer& l) { return sos_inverse(l, y); },
                 [&](const PermutationLayer& l) { return perm_inverse(l, y); },
                 [&](const AffineLayer& l) { return l.lu.solve(y - l.offset).eval(); },
                 [&](const OdeFlowLayer& l) { return ode_inverse(l, y); }},
      layer);
}

double layer_log_det(const Layer& layer, const Vec& x) {
  require_dim(x.size(), layer_dim(layer), "layer_log_det");
  return std::visit(Overloaded{[&](const AcfLayer& l) { return acf_log_det(l, x); },
                               [&](const DsfLayer& l) { return dsf_log_det(l, x); },
                               [&](const SosLayer& l) { return sos_log_det(l, x); },
                               [&](const PermutationLayer&) { return 0.0; },
                               [&](const AffineLayer& l) { return l.log_abs_det; },
                               [&](const OdeFlowLayer& l) { return ode_log_det(l, x); }},
                    layer);
}

Layer inverse_layer(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const AcfLayer& l) -> Layer { return acf_inverse_layer(l); },
          [](const DsfLayer&) -> Layer {
            fail(ErrorKind::kInvalidArgument, "inverse_layer: DSF has no closed-form inverse");
          },
          [](const SosLayer&) -> Layer {
            fail(ErrorKind::kInvalidArgument, "inverse_layer: SoS has no closed-form inverse");
          },
          [](const PermutationLayer& l) -> Layer { return perm_inverse_layer(l); },
          [](const AffineLayer& l) -> Layer {
            const Mat inv = l.lu.inverse();
            return AffineLayer(inv, -inv * l.offset);
          },
          [](const OdeFlowLayer& l) -> Layer {
            return OdeFlowLayer{negated(l.field), l.horizon, l.steps_per_unit};
          }},
      layer);
}

double sos_transform_quadrature(const SosLayer& layer, const Vec& x, double tol) {
  validate(layer);
  const SosPoly p = sos_poly(layer, x);
  const double z = x[layer.dim - 1];
  const double integral =
      adaptive_simpson([&p](double u) { return horner(p.squared, u); }, 0.0, z, tol);
  return p.offset + integral;
}

Vec dsf_diagonal(const DsfLayer& layer, const Vec& x) {
  validate(layer);
  require_dim(x.size(), layer.dim, "dsf_diagonal");
  Vec diag(layer.dim);
  for (int c = 0; c < layer.dim; ++c) {
    diag[c] = std::exp(dsf_scalar(dsf_params(layer, c, x.head(c)), x[c]).log_slope);
  }
  return diag;
}

// ---- JSON -------------------------------------------------------------------

namespace {

Json handles_json(const std::vector<ScalarField>& hs) {
  Json arr = Json::array();
  for (const auto& h : hs) arr.push_back(to_json(h));
  return arr;
}

std::vector<ScalarField> handles_from(const Json& j) {
  std::vector<ScalarField> hs;
  for (const auto& e : j) hs.push_back(scalar_field_from_json(e));
  return hs;
}

Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from(const Json& j) {
  const Eigen::Index n = static_cast<Eigen::Index>(j.size());
  Mat m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = j[r].get<std::vector<double>>();
    require_dim(static_cast<Eigen::Index>(row.size()), n, "affine matrix row");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[c];
  }
  return m;
}

}  // namespace

Json to_json(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const AcfLayer& l) -> Json {
            return {{"kind", "acf"},
                    {"dim", l.dim},
                    {"split", l.split},
                    {"scale", handles_json(l.scale)},
                    {"shift", handles_json(l.shift)}};
          },
          [](const DsfLayer& l) -> Json {
            Json w = Json::array(), b = Json::array(), t = Json::array();
            for (int c = 0; c < l.dim; ++c) {
              w.push_back(handles_json(l.weight[c]));
              b.push_back(handles_json(l.bias[c]));
              t.push_back(handles_json(l.temperature[c]));
            }
            return {{"kind", "dsf"}, {"dim", l.dim},   {"components", l.components},
                    {"weight", w},   {"bias", b},      {"temperature", t}};
          },
          [](const SosLayer& l) -> Json {
            return {{"kind", "sos"},
                    {"dim", l.dim},
                    {"offset", to_json(l.offset)},
                    {"coeffs", handles_json(l.coeffs)}};
          },
          [](const PermutationLayer& l) -> Json {
            return {{"kind", "permutation"}, {"perm", l.perm}};
          },
          [](const AffineLayer& l) -> Json {
            return {{"kind", "affine"},
                    {"matrix", mat_json(l.matrix)},
                    {"offset", std::vector<double>(l.offset.data(),
                                                   l.offset.data() + l.offset.size())}};
          },
          [](const OdeFlowLayer& l) -> Json {
            return {{"kind", "ode_flow"},
                    {"field", to_json(l.field)},
                    {"horizon", l.horizon},
                    {"steps_per_unit", l.steps_per_unit}};
          }},
      layer);
}

Layer layer_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "acf") {
    AcfLayer l{j.at("dim").get<int>(), j.at("split").get<int>(), handles_from(j.at("scale")),
               handles_from(j.at("shift"))};
    validate(l);
    return l;
  }
  if (kind == "dsf") {
    DsfLayer l;
    l.dim = j.at("dim").get<int>();
    l.components = j.at("components").get<int>();
    for (int c = 0; c < l.dim; ++c) {
      l.weight.push_back(handles_from(j.at("weight").at(c)));
      l.bias.push_back(handles_from(j.at("bias").at(c)));
      l.temperature.push_back(handles_from(j.at("temperature").at(c)));
    }
    validate(l);
    return l;
  }
  if (kind == "sos") {
    SosLayer l{j.at("dim").get<int>(), scalar_field_from_json(j.at("offset")),
               handles_from(j.at("coeffs"))};
    validate(l);
    return l;
  }
  if (kind == "permutation") return PermutationLayer(j.at("perm").get<std::vector<int>>());
  if (kind == "affine") {
    const auto off = j.at("offset").get<std::vector<double>>();
    return AffineLayer(mat_from(j.at("matrix")),
                       Eigen::Map<const Vec>(off.data(), static_cast<Eigen::Index>(off.size())));
  }
  if (kind == "ode_flow") {
    return OdeFlowLayer{vector_field_from_json(j.at("field")), j.at("horizon").get<double>(),
                        j.at("steps_per_unit").get<int>()};
  }
  fail(ErrorKind::kInvalidArgument, "unknown layer kind '" + kind + "'");
}

}  // namespace flowlab
