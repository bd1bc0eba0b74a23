#pragma once

#include <vector>

#include "flowlab/layers.hpp"

namespace flowlab {

/// Ordered composition of layers. layers[0] is applied first, so the storage
/// [g_n, W_n, ..., g_1, W_1] realizes W_1 o g_1 o ... o W_n o g_n.
struct Inn {
  int dim = 0;
  std::vector<Layer> layers;

  Inn() = default;
  explicit Inn(int d, std::vector<Layer> ls = {});

  void push(Layer layer);
  std::size_t size() const { return layers.size(); }
};

Vec inn_forward(const Inn& inn, const Vec& x);
Vec inn_inverse(const Inn& inn, const Vec& y);
/// Sum of layer log-dets along the forward orbit of x.
double inn_log_det(const Inn& inn, const Vec& x);

/// Layer-wise closed-form inverse (reversed order). Throws for DSF/SoS layers.
Inn inverse_inn(const Inn& inn);

/// Appends `second` after `first` (first is applied first).
Inn then(const Inn& first, const Inn& second);

/// Six layers over coordinates (i, j) whose product is the reflection x_i -> -x_i:
/// swap, x_j += x_i, swap, x_j -= x_i, swap, x_j += x_i.
std::vector<Layer> sign_flip_layers(int dim, int i, int j);

/// Realizes x -> A x + b using only single-coordinate ACFs (constant scale,
/// linear shift) and permutations. Requires d >= 2 and |det A| > 1e-12.
Inn realize_gl(const Mat& a, const Vec& b);

/// Reads off (A, b) of an affine Inn by probing the origin and the basis vectors.
std::pair<Mat, Vec> affine_part(const Inn& inn);

bool contains_kind(const Inn& inn, const char* kind);

Json to_json(const Inn& inn);
Inn inn_from_json(const Json& j);

}  // namespace flowlab
