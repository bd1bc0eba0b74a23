#pragma once

#include <memory>
#include <random>
#include <vector>

#include "flowlab/node.hpp"
#include "flowlab/smooth_map.hpp"

namespace flowlab {

struct NearIdResult {
  bool ok = false;
  double max_op_norm = 0.0;
  Vec worst_at;
};

inline constexpr double kNearIdMargin = 1e-9;
inline constexpr double kMinorThreshold = 1e-10;
inline constexpr int kSplitCap = 1024;

/// max over a grid_n^d node grid of ||Df(x) - I||_op; ok iff it is < 1 - 1e-9.
NearIdResult near_id_check(const SmoothMap& f, const Box& box, int grid_n);

/// Every trailing k x k principal block of J has |det| > 1e-10.
bool trailing_minors_nonzero(const Mat& j);
/// Size of the first trailing block that fails, or 0 when all pass.
int first_vanishing_trailing_minor(const Mat& j);

/// I + U S V^T with random orthogonal U, V and singular values uniform in
/// [0, radius), so ||J - I||_op < radius.
Mat shaped_near_identity(std::mt19937_64& rng, int d, double radius);

/// n copies of x -> Phi(x, 1/n); their n-fold composition is Phi(., 1).
std::vector<SmoothMap> flow_endpoint_split(const FlowHandle& phi, int n);

/// pieces.back() o ... o pieces.front()
SmoothMap compose_all(const std::vector<SmoothMap>& pieces);

struct SplitSearch {
  int n = 0;
  bool ok = false;
  double max_op_norm = 0.0;
  std::vector<SmoothMap> pieces;
};

/// Doubles n from 1 until Phi(., 1/n) is near-Id on the grid. Throws
/// kBudgetExceeded (with the last op norm) if n would exceed `cap`.
SplitSearch split_until_near_id(const FlowHandle& phi, const Box& box, int grid_n,
                                int cap = kSplitCap);

class TriangularChain;

/// F_i(x) = (x_1, ..., h_i(x), ..., x_d), with a bracketed 1-D inverse.
struct SingleCoordinateFactor {
  int index = 0;
  int direction = 0;  // +1 or -1: sign of d h_i / d x_i on the box
  std::shared_ptr<const TriangularChain> chain;

  double h(const Vec& x) const;
  Vec apply(const Vec& x) const;
  Vec invert(const Vec& y) const;
};

struct Factorization {
  std::vector<SingleCoordinateFactor> factors;  // factors[i] is F_{i+1}
  double recomposition_error = 0.0;
  double tol = 0.0;
  int grid_n = 0;
  Box box;
  bool monotone_sweeps_ok = false;
};

/// Factors f = F_1 o ... o F_d on `box` by the induction h_m = (f o F_d^{-1} o
/// ... o F_{m+1}^{-1})_m. Throws kHypothesis if a trailing minor of Df
/// vanishes at a probe node. The recomposition error is measured on a
/// `grid_n`^d validation grid.
Factorization triangular_factorize(const SmoothMap& f, const Box& box, double tol,
                                   int grid_n = 41, int probe_n = 9);

/// F_1 o ... o F_d (F_d applied first).
Vec recompose(const Factorization& fz, const Vec& x);

/// Conjugates factor i by the transposition (i, d-1) so it alters only the last slot.
SmoothMap as_last_coordinate_map(const SingleCoordinateFactor& factor, int dim);

Json to_json(const Factorization& fz);

}  // namespace flowlab
