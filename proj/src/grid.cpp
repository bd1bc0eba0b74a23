#include "flowlab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace flowlab {

Grid::Grid(Vec lo_, Vec hi_, std::vector<int> n_) : lo(std::move(lo_)), hi(std::move(hi_)), n(std::move(n_)) {
  require_dim(lo.size(), static_cast<Eigen::Index>(n.size()), "Grid");
  require_dim(hi.size(), static_cast<Eigen::Index>(n.size()), "Grid");
  if (n.empty()) fail(ErrorKind::kInvalidArgument, "Grid: dimension must be >= 1");
  long total = 1;
  for (int i = 0; i < dim(); ++i) {
    if (!(lo[i] < hi[i])) fail(ErrorKind::kInvalidArgument, "Grid: need lo < hi on every axis");
    if (n[i] < 2) fail(ErrorKind::kInvalidArgument, "Grid: need at least 2 cells per axis");
    total *= n[i];
    if (total > kMaxCells) fail(ErrorKind::kBudgetExceeded, "Grid: more than 2^24 cells");
  }
}

Grid Grid::cube(int dim, double lo, double hi, int cells) {
  return Grid(Vec::Constant(dim, lo), Vec::Constant(dim, hi), std::vector<int>(dim, cells));
}

long Grid::cells() const {
  return std::accumulate(n.begin(), n.end(), 1L, [](long a, int b) { return a * b; });
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= width(i);
  return v;
}

std::vector<int> Grid::unflatten(long index) const {
  std::vector<int> idx(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(index % n[i]);
    index /= n[i];
  }
  return idx;
}

long Grid::flatten(const std::vector<int>& idx) const {
  long flat = 0;
  for (int i = 0; i < dim(); ++i) flat = flat * n[i] + idx[i];
  return flat;
}

Vec Grid::center(long index) const {
  const auto idx = unflatten(index);
  Vec c(dim());
  for (int i = 0; i < dim(); ++i) c[i] = lo[i] + (idx[i] + 0.5) * width(i);
  return c;
}

long Grid::locate(const Vec& x) const {
  require_dim(x.size(), dim(), "Grid::locate");
  std::vector<int> idx(dim());
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return -1;
    idx[i] = std::min(n[i] - 1, static_cast<int>((x[i] - lo[i]) / width(i)));
  }
  return flatten(idx);
}

bool Grid::operator==(const Grid& other) const {
  return n == other.n && lo == other.lo && hi == other.hi;
}

GridMeasure::GridMeasure(Grid g, Vec w) : grid(std::move(g)), weights(std::move(w)) {
  require_dim(weights.size(), grid.cells(), "GridMeasure");
  if (!weights.allFinite() || weights.minCoeff() < 0.0) {
    fail(ErrorKind::kInvalidArgument, "GridMeasure: weights must be finite and nonnegative");
  }
  raw_mass = weights.sum();
  if (!(raw_mass > 0.0)) fail(ErrorKind::kInvalidArgument, "GridMeasure: zero total mass");
  weights /= raw_mass;
}

double GridMeasure::density(const Vec& x) const {
  const long c = grid.locate(x);
  return c < 0 ? 0.0 : weights[c] / grid.cell_volume();
}

GridMeasure measure_from_density(const Grid& grid, const std::function<double(const Vec&)>& density) {
  Vec w(grid.cells());
  for (long c = 0; c < grid.cells(); ++c) w[c] = density(grid.center(c)) * grid.cell_volume();
  return GridMeasure(grid, w);
}

SampleSet sample_measure(const GridMeasure& mu, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> cdf(mu.weights.size());
  std::partial_sum(mu.weights.data(), mu.weights.data() + mu.weights.size(), cdf.begin());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampleSet s{Mat(mu.dim(), n), seed};
  for (int k = 0; k < n; ++k) {
    const double u = unit(rng) * cdf.back();
    const long cell = std::min<long>(static_cast<long>(cdf.size()) - 1,
                                     std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    const auto idx = mu.grid.unflatten(cell);
    for (int i = 0; i < mu.dim(); ++i) {
      s.points(i, k) = mu.grid.lo[i] + (idx[i] + unit(rng)) * mu.grid.width(i);
    }
  }
  return s;
}

GridMeasure histogram(const Grid& grid, const SampleSet& samples, long* dropped) {
  require_dim(samples.dim(), grid.dim(), "histogram");
  Vec w = Vec::Zero(grid.cells());
  long out = 0;
  for (int k = 0; k < samples.size(); ++k) {
    const long c = grid.locate(samples.points.col(k));
    if (c < 0) {
      ++out;
    } else {
      w[c] += 1.0;
    }
  }
  if (dropped) *dropped = out;
  return GridMeasure(grid, w);
}

GridMeasure coarsen(const GridMeasure& mu, int factor) {
  if (factor < 1) fail(ErrorKind::kInvalidArgument, "coarsen: factor must be >= 1");
  std::vector<int> n = mu.grid.n;
  for (int& k : n) {
    if (k % factor != 0 || k / factor < 2) {
      fail(ErrorKind::kInvalidArgument, "coarsen: resolution " + std::to_string(k) +
                                            " is not a multiple of " + std::to_string(factor) +
                                            " with at least 2 coarse cells");
    }
    k /= factor;
  }
  Grid coarse(mu.grid.lo, mu.grid.hi, n);
  Vec w = Vec::Zero(coarse.cells());
  for (long c = 0; c < mu.grid.cells(); ++c) {
    std::vector<int> idx = mu.grid.unflatten(c);
    for (int& i : idx) i /= factor;
    w[coarse.flatten(idx)] += mu.weights[c];
  }
  GridMeasure out(coarse, w);
  out.raw_mass = mu.raw_mass;
  return out;
}

GridMeasure uniform_measure(const Grid& grid) { return GridMeasure(grid, Vec::Ones(grid.cells())); }

Json grid_to_json(const Grid& g) {
  return {{"dim", g.dim()},
          {"lo", std::vector<double>(g.lo.data(), g.lo.data() + g.dim())},
          {"hi", std::vector<double>(g.hi.data(), g.hi.data() + g.dim())},
          {"n", g.n}};
}

Grid grid_from_json(const Json& j) {
  const auto lo = j.at("lo").get<std::vector<double>>();
  const auto hi = j.at("hi").get<std::vector<double>>();
  const auto n = j.at("n").get<std::vector<int>>();
  if (j.contains("dim")) require_dim(j.at("dim").get<int>(), static_cast<Eigen::Index>(n.size()), "grid header");
  return Grid(Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
              Eigen::Map<const Vec>(hi.data(), static_cast<Eigen::Index>(hi.size())), n);
}

namespace {

static_assert(std::endian::native == std::endian::little, "sidecar IO assumes little-endian");

}  // namespace

void save_measure(const std::string& path, const GridMeasure& mu, long inline_limit) {
  Json j = grid_to_json(mu.grid);
  if (mu.grid.cells() <= inline_limit) {
    j["weights"] = std::vector<double>(mu.weights.data(), mu.weights.data() + mu.weights.size());
  } else {
    const std::string side = path + ".bin";
    std::ofstream bin(side, std::ios::binary);
    if (!bin) fail(ErrorKind::kIo, "save_measure: cannot write " + side);
    bin.write(reinterpret_cast<const char*>(mu.weights.data()),
              static_cast<std::streamsize>(mu.weights.size() * sizeof(double)));
    j["weights_file"] = std::filesystem::path(side).filename().string();
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "save_measure: cannot write " + path);
  out << j.dump(2) << "\n";
}

GridMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "load_measure: cannot read " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, "load_measure: " + path + ": " + e.what());
  }
  const Grid g = grid_from_json(j);
  Vec w(g.cells());
  if (j.contains("weights")) {
    const auto v = j.at("weights").get<std::vector<double>>();
    require_dim(static_cast<Eigen::Index>(v.size()), g.cells(), "load_measure weights");
    w = Eigen::Map<const Vec>(v.data(), g.cells());
  } else {
    const auto side = std::filesystem::path(path).parent_path() / j.at("weights_file").get<std::string>();
    std::ifstream bin(side, std::ios::binary);
    if (!bin) fail(ErrorKind::kIo, "load_measure: cannot read " + side.string());
    bin.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(g.cells() * sizeof(double)));
    if (bin.gcount() != static_cast<std::streamsize>(g.cells() * sizeof(double))) {
      fail(ErrorKind::kIo, "load_measure: short sidecar " + side.string());
    }
  }
  return GridMeasure(g, w);
}

}  // namespace flowlab
