#include "flowlab/inn.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace flowlab {

namespace {

constexpr double kGlDetThreshold = 1e-12;

[[noreturn]] void rethrow_at(const Error& e, std::size_t index, const Layer& layer) {
  fail(e.kind(), "layer " + std::to_string(index) + " (" + layer_kind(layer) + "): " + e.what());
}

// x_target <- exp(log_scale) * x_target + sum_j coeffs_j x_j + constant, as a
// single-coordinate ACF conjugated by the transposition (target, d-1).
void push_row_op(std::vector<Layer>& out, int d, int target, const Vec& coeffs,
                 double log_scale, double constant) {
  const int last = d - 1;
  Vec w = Vec::Zero(d - 1);
  for (int j = 0; j < d; ++j) {
    if (j == target || coeffs[j] == 0.0) continue;
    w[j == last ? target : j] = coeffs[j];
  }
  if (target != last) out.emplace_back(transposition(d, target, last));
  out.emplace_back(single_coordinate_acf(d, constant_field(d - 1, log_scale),
                                         linear_field(w, constant)));
  if (target != last) out.emplace_back(transposition(d, target, last));
}

void push_add(std::vector<Layer>& out, int d, int target, int source, double c) {
  Vec coeffs = Vec::Zero(d);
  coeffs[source] = c;
  push_row_op(out, d, target, coeffs, 0.0, 0.0);
}

}  // namespace

Inn::Inn(int d, std::vector<Layer> ls) : dim(d), layers(std::move(ls)) {
  if (d < 1) fail(ErrorKind::kInvalidArgument, "Inn: dimension must be >= 1");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layer_dim(layers[i]) != d) {
      fail(ErrorKind::kDimensionMismatch, "Inn: layer " + std::to_string(i) +
                                              " has dimension " +
                                              std::to_string(layer_dim(layers[i])));
    }
  }
}

void Inn::push(Layer layer) {
  require_dim(layer_dim(layer), dim, "Inn::push");
  layers.push_back(std::move(layer));
}

Vec inn_forward(const Inn& inn, const Vec& x) {
  require_dim(x.size(), inn.dim, "inn_forward");
  Vec z = x;
  for (std::size_t i = 0; i < inn.layers.size(); ++i) {
    try {
      z = layer_forward(inn.layers[i], z);
    } catch (const Error& e) {
      rethrow_at(e, i, inn.layers[i]);
    }
  }
  return z;
}

Vec inn_inverse(const Inn& inn, const Vec& y) {
  require_dim(y.size(), inn.dim, "inn_inverse");
  Vec z = y;
  for (std::size_t k = inn.layers.size(); k-- > 0;) {
    try {
      z = layer_inverse(inn.layers[k], z);
    } catch (const Error& e) {
      rethrow_at(e, k, inn.layers[k]);
    }
  }
  return z;
}

double inn_log_det(const Inn& inn, const Vec& x) {
  require_dim(x.size(), inn.dim, "inn_log_det");
  Vec z = x;
  double total = 0.0;
  for (std::size_t i = 0; i < inn.layers.size(); ++i) {
    try {
      total += layer_log_det(inn.layers[i], z);
      z = layer_forward(inn.layers[i], z);
    } catch (const Error& e) {
      rethrow_at(e, i, inn.layers[i]);
    }
  }
  return total;
}

Inn inverse_inn(const Inn& inn) {
  Inn out(inn.dim);
  for (std::size_t k = inn.layers.size(); k-- > 0;) out.push(inverse_layer(inn.layers[k]));
  return out;
}

Inn then(const Inn& first, const Inn& second) {
  require_dim(second.dim, first.dim, "then");
  Inn out = first;
  for (const auto& l : second.layers) out.push(l);
  return out;
}

std::vector<Layer> sign_flip_layers(int dim, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= dim || j >= dim) {
    fail(ErrorKind::kInvalidArgument, "sign_flip_layers: need two distinct coordinates");
  }
  std::vector<Layer> out;
  out.emplace_back(transposition(dim, i, j));
  push_add(out, dim, j, i, 1.0);
  out.emplace_back(transposition(dim, i, j));
  push_add(out, dim, j, i, -1.0);
  out.emplace_back(transposition(dim, i, j));
  push_add(out, dim, j, i, 1.0);
  return out;
}

Inn realize_gl(const Mat& a, const Vec& b) {
  require_dim(a.cols(), a.rows(), "realize_gl");
  require_dim(b.size(), a.rows(), "realize_gl");
  const int d = static_cast<int>(a.rows());
  if (d < 2) fail(ErrorKind::kInvalidArgument, "realize_gl: dimension must be >= 2");

  const Eigen::PartialPivLU<Mat> lu(a);
  if (!(std::abs(lu.determinant()) > kGlDetThreshold)) {
    fail(ErrorKind::kSingular, "realize_gl: |det A| <= 1e-12");
  }
  // P A = L U, hence A x + b = P^T (L (U x) + P b).
  const Mat packed = lu.matrixLU();
  const Mat p = lu.permutationP().toDenseMatrix().cast<double>();
  const Vec pb = p * b;

  Inn inn(d);
  auto emit = [&inn](std::vector<Layer> ls) {
    for (auto& l : ls) inn.push(std::move(l));
  };

  // U stage: top row first, so every row reads still-unmodified x_{>i}.
  for (int i = 0; i < d; ++i) {
    const double diag = packed(i, i);
    std::vector<Layer> ls;
    if (diag < 0.0) ls = sign_flip_layers(d, i, i == d - 1 ? 0 : d - 1);
    Vec coeffs = Vec::Zero(d);
    for (int j = i + 1; j < d; ++j) coeffs[j] = packed(i, j);
    if (std::abs(diag) != 1.0 || coeffs.any()) {
      push_row_op(ls, d, i, coeffs, std::log(std::abs(diag)), 0.0);
    }
    emit(std::move(ls));
  }
  // Unit lower stage plus translation: bottom row first, reading x_{<i}.
  for (int i = d - 1; i >= 0; --i) {
    Vec coeffs = Vec::Zero(d);
    for (int j = 0; j < i; ++j) coeffs[j] = packed(i, j);
    if (!coeffs.any() && pb[i] == 0.0) continue;
    std::vector<Layer> ls;
    push_row_op(ls, d, i, coeffs, 0.0, pb[i]);
    emit(std::move(ls));
  }
  // y = P^T z, i.e. y_i = z_{perm[i]} with perm[i] the column of row i of P^T.
  const Mat pt = p.transpose();
  std::vector<int> perm(d);
  bool trivial = true;
  for (int i = 0; i < d; ++i) {
    pt.row(i).maxCoeff(&perm[i]);
    trivial = trivial && perm[i] == i;
  }
  if (!trivial) inn.push(PermutationLayer(perm));
  return inn;
}

std::pair<Mat, Vec> affine_part(const Inn& inn) {
  const int d = inn.dim;
  const Vec origin = inn_forward(inn, Vec::Zero(d));
  Mat m(d, d);
  for (int j = 0; j < d; ++j) m.col(j) = inn_forward(inn, Vec::Unit(d, j)) - origin;
  return {m, origin};
}

bool contains_kind(const Inn& inn, const char* kind) {
  for (const auto& l : inn.layers) {
    if (std::strcmp(layer_kind(l), kind) == 0) return true;
  }
  return false;
}

Json to_json(const Inn& inn) {
  Json layers = Json::array();
  for (const auto& l : inn.layers) layers.push_back(to_json(l));
  return {{"dim", inn.dim}, {"layers", layers}};
}

Inn inn_from_json(const Json& j) {
  Inn inn(j.at("dim").get<int>());
  for (const auto& l : j.at("layers")) inn.push(layer_from_json(l));
  return inn;
}

}  // namespace flowlab
