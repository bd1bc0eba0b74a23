#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "flowlab/grid.hpp"
#include "flowlab/inn.hpp"
#include "flowlab/scalar_field.hpp"

namespace flowlab {

inline constexpr double kDensityFloor = 1e-12;

/// Knothe-Rosenblatt map of a grid measure onto [0,1]^d. Component i depends
/// on x_i..x_d only, so the Jacobian is upper triangular: T_d is the marginal
/// CDF of x_d and T_i the CDF of x_i conditioned on x_{>i}.
class TriangularMap {
 public:
  TriangularMap() = default;
  explicit TriangularMap(const GridMeasure& mu);

  int dim() const { return grid_.dim(); }
  const Grid& grid() const { return grid_; }
  long floored_cells() const { return floored_; }

  Vec apply(const Vec& x) const;
  /// Componentwise monotone inverse, solved from the last coordinate down.
  Vec inverse(const Vec& u) const;
  /// T_axis at x (reads x_axis..x_{d-1}).
  double component(int axis, const Vec& x) const;

 private:
  struct Corner {
    long offset;
    double weight;
  };
  std::vector<Corner> corners(int axis, const Vec& x) const;
  // Interpolated CDF node values along `axis` for the conditioning read from x.
  std::vector<double> node_cdf(int axis, const Vec& x) const;

  Grid grid_;
  long floored_ = 0;
  // tables_[k][node * stride_[k] + cond], node in [0, n_k], cond row-major over axes > k.
  std::vector<std::vector<double>> tables_;
  std::vector<long> stride_;
};

TriangularMap knothe_map(const GridMeasure& mu);

struct MollifyOptions {
  int nodes_last = 2001;  // kernel quadrature nodes along the last axis
  int nodes_other = 17;
};

/// Discrete convolution of tau with the normalized bump kernel of radius t,
/// phi(x) ~ exp(-1/(1 - |x|^2)). Throws if `box` inflated by t leaves tau's domain.
ScalarField mollify(const ScalarField& tau, double t, const Box& box, const MollifyOptions& opts = {});

using Sampler = std::function<Vec(std::mt19937_64&)>;

SampleSet pushforward_samples(const Inn& inn, const Sampler& base, int n, std::uint64_t seed);
SampleSet pushforward_samples(const Inn& inn, const SampleSet& base);

struct PushforwardResult {
  GridMeasure measure;
  double raw_mass = 0.0;  // sum of q(center) * volume before renormalization
  long failed_cells = 0;
};

/// q(y) = p(g^{-1}(y)) |det D g^{-1}(y)| at target cell centres. Cells whose
/// inversion fails are treated as massless; more than 1% failures aborts.
PushforwardResult grid_pushforward(const Inn& inn, const GridMeasure& mu, const Grid& target);

/// Pushforward of mu under an arbitrary map by subdividing every source cell
/// into `sub`^d equal pieces and moving each piece's mass to the cell that
/// contains its mapped midpoint.
GridMeasure map_pushforward(const std::function<Vec(const Vec&)>& map, const GridMeasure& mu,
                            const Grid& target, int sub);

/// Kolmogorov-Smirnov distance of the values to Uniform[0,1].
double ks_uniform(std::vector<double> values);

}  // namespace flowlab
