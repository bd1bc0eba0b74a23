#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowlab/core.hpp"
#include "json.hpp"

namespace flowlab {

using Json = nlohmann::json;

inline constexpr long kMaxCells = 1L << 24;

/// Regular axis-aligned grid of n_i cells per axis; flat indices are row-major
/// (last axis fastest).
struct Grid {
  Vec lo;
  Vec hi;
  std::vector<int> n;

  Grid() = default;
  Grid(Vec lo_, Vec hi_, std::vector<int> n_);
  static Grid cube(int dim, double lo, double hi, int cells);

  int dim() const { return static_cast<int>(n.size()); }
  long cells() const;
  double width(int axis) const { return (hi[axis] - lo[axis]) / n[axis]; }
  double cell_volume() const;
  Box box() const { return Box(lo, hi); }

  std::vector<int> unflatten(long index) const;
  long flatten(const std::vector<int>& idx) const;
  Vec center(long index) const;
  /// Cell containing x, or -1 when x is outside the closed box.
  long locate(const Vec& x) const;

  bool operator==(const Grid& other) const;
};

/// Probability measure given by nonnegative cell masses.
struct GridMeasure {
  Grid grid;
  Vec weights;
  double raw_mass = 1.0;  // mass before renormalization

  GridMeasure() = default;
  /// Renormalizes; throws on negative, non-finite or all-zero weights.
  GridMeasure(Grid g, Vec w);

  int dim() const { return grid.dim(); }
  /// Piecewise-constant density: weight / cell volume, 0 outside the box.
  double density(const Vec& x) const;
};

/// Masses density(center) * volume per cell.
GridMeasure measure_from_density(const Grid& grid, const std::function<double(const Vec&)>& density);

/// Point cloud; one sample per column.
struct SampleSet {
  Mat points;
  std::optional<std::uint64_t> seed;

  int dim() const { return static_cast<int>(points.rows()); }
  int size() const { return static_cast<int>(points.cols()); }
};

/// Draws a cell by mass, then a uniform point inside it.
SampleSet sample_measure(const GridMeasure& mu, int n, std::uint64_t seed);

/// Normalized histogram; samples outside the grid box are dropped and counted.
GridMeasure histogram(const Grid& grid, const SampleSet& samples, long* dropped = nullptr);

/// Sums blocks of `factor`^d cells; every n_i must be divisible by factor.
GridMeasure coarsen(const GridMeasure& mu, int factor);

/// Uniform measure on the grid.
GridMeasure uniform_measure(const Grid& grid);

Json grid_to_json(const Grid& g);
Grid grid_from_json(const Json& j);

/// Writes the JSON header; weights go inline for grids up to `inline_limit`
/// cells, otherwise into a little-endian float64 sidecar `<path>.bin`.
void save_measure(const std::string& path, const GridMeasure& mu, long inline_limit = 4096);
GridMeasure load_measure(const std::string& path);

}  // namespace flowlab
