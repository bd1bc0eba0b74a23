#pragma once

#include <variant>
#include <vector>

#include "flowlab/core.hpp"
#include "flowlab/ode.hpp"
#include "flowlab/scalar_field.hpp"

namespace flowlab {

/// Affine coupling: x_{>k} <- x_{>k} * exp(s(x_{<=k})) + t(x_{<=k}).
/// `split` is k in [1, d-1]; s and t hold d-k handles of arity k.
struct AcfLayer {
  int dim = 0;
  int split = 0;
  std::vector<ScalarField> scale;
  std::vector<ScalarField> shift;
};

/// Coupling that alters only the last coordinate (k = d-1).
AcfLayer single_coordinate_acf(int dim, ScalarField scale, ScalarField shift);

/// Deep sigmoidal flow. Coordinate c (0-based) is mapped by
///   g_c = logit( sum_j w_{c,j} sigmoid((x_c - b_{c,j}) / tau_{c,j}) )
/// where every conditioner takes x_{<c} (arity c). Requires w > 0, sum w = 1,
/// tau > 0 at every conditioning point.
struct DsfLayer {
  int dim = 0;
  int components = 0;
  std::vector<std::vector<ScalarField>> weight;  // [dim][components]
  std::vector<std::vector<ScalarField>> bias;
  std::vector<std::vector<ScalarField>> temperature;
};

/// DSF with the same constant conditioners for every coordinate.
DsfLayer constant_dsf(int dim, const Vec& w, const Vec& b, const Vec& tau);

/// Sum-of-squares polynomial flow on the last coordinate:
///   x_d <- c(x_{<d}) + int_0^{x_d} (sum_l h_l(x_{<d}) u^l)^2 du
struct SosLayer {
  int dim = 0;
  ScalarField offset;
  std::vector<ScalarField> coeffs;  // h_0 .. h_r
};

/// y_i = x_{perm[i]}, 0-based.
struct PermutationLayer {
  std::vector<int> perm;

  explicit PermutationLayer(std::vector<int> p);
  int dim() const { return static_cast<int>(perm.size()); }
};

PermutationLayer transposition(int dim, int i, int j);

/// x -> A x + b with |det A| > 1e-12.
struct AffineLayer {
  Mat matrix;
  Vec offset;
  Eigen::PartialPivLU<Mat> lu;
  double log_abs_det = 0.0;

  AffineLayer(Mat a, Vec b);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

using Layer =
    std::variant<AcfLayer, DsfLayer, SosLayer, PermutationLayer, AffineLayer, OdeFlowLayer>;

int layer_dim(const Layer& layer);
const char* layer_kind(const Layer& layer);

Vec layer_forward(const Layer& layer, const Vec& x);
/// Numeric inversion for DSF/SoS (bracketing + Newton, tolerance 1e-12 in x).
Vec layer_inverse(const Layer& layer, const Vec& y);
/// log |det D layer(x)|.
double layer_log_det(const Layer& layer, const Vec& x);

/// Closed-form inverse layer where one exists (ACF, permutation, affine, ODE).
/// Throws kInvalidArgument for DSF and SoS.
Layer inverse_layer(const Layer& layer);

/// Cross-check of the SoS closed form by adaptive Simpson quadrature.
double sos_transform_quadrature(const SosLayer& layer, const Vec& x, double tol = 1e-10);

/// Analytic d g_c / d x_c for each DSF coordinate (diagonal of the triangular Jacobian).
Vec dsf_diagonal(const DsfLayer& layer, const Vec& x);

Json to_json(const Layer& layer);
Layer layer_from_json(const Json& j);

}  // namespace flowlab
