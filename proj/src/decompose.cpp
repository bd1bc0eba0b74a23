#include "flowlab/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flowlab/layers.hpp"
#include "flowlab/numerics.hpp"

namespace flowlab {

NearIdResult near_id_check(const SmoothMap& f, const Box& box, int grid_n) {
  if (grid_n < 2) fail(ErrorKind::kInvalidArgument, "near_id_check: grid_n must be >= 2");
  require_dim(box.dim(), f.dim, "near_id_check");
  NearIdResult r;
  r.worst_at = box.lo;
  const Mat eye = Mat::Identity(f.dim, f.dim);
  for_each_node(box, grid_n, [&](const Vec& x) {
    const Mat j = jacobian(f, x);
    if (!j.allFinite()) fail(ErrorKind::kNonFinite, "near_id_check: non-finite Jacobian");
    const double n = op_norm(j - eye);
    if (n > r.max_op_norm) {
      r.max_op_norm = n;
      r.worst_at = x;
    }
  });
  r.ok = r.max_op_norm < 1.0 - kNearIdMargin;
  return r;
}

int first_vanishing_trailing_minor(const Mat& j) {
  require_dim(j.cols(), j.rows(), "trailing_minors_nonzero");
  const Eigen::Index d = j.rows();
  for (Eigen::Index k = 1; k <= d; ++k) {
    const Mat block = j.bottomRightCorner(k, k);
    if (!(std::abs(block.partialPivLu().determinant()) > kMinorThreshold)) {
      return static_cast<int>(k);
    }
  }
  return 0;
}

bool trailing_minors_nonzero(const Mat& j) { return first_vanishing_trailing_minor(j) == 0; }

Mat shaped_near_identity(std::mt19937_64& rng, int d, double radius) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto orthogonal = [&]() {
    Mat m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) m(r, c) = g(rng);
    }
    return Mat(Eigen::HouseholderQR<Mat>(m).householderQ());
  };
  Vec s(d);
  for (int i = 0; i < d; ++i) s[i] = radius * unit(rng);
  return Mat::Identity(d, d) + orthogonal() * s.asDiagonal() * orthogonal().transpose();
}

std::vector<SmoothMap> flow_endpoint_split(const FlowHandle& phi, int n) {
  if (n < 1) fail(ErrorKind::kInvalidArgument, "flow_endpoint_split: n must be >= 1");
  return std::vector<SmoothMap>(static_cast<std::size_t>(n), phi.at(1.0 / n));
}

SmoothMap compose_all(const std::vector<SmoothMap>& pieces) {
  if (pieces.empty()) fail(ErrorKind::kInvalidArgument, "compose_all: no pieces");
  SmoothMap out = pieces.front();
  for (std::size_t i = 1; i < pieces.size(); ++i) out = compose(pieces[i], out);
  return out;
}

SplitSearch split_until_near_id(const FlowHandle& phi, const Box& box, int grid_n, int cap) {
  SplitSearch s;
  for (int n = 1; n <= cap; n *= 2) {
    const NearIdResult r = near_id_check(phi.at(1.0 / n), box, grid_n);
    s.n = n;
    s.max_op_norm = r.max_op_norm;
    if (r.ok) {
      s.ok = true;
      s.pieces = flow_endpoint_split(phi, n);
      return s;
    }
  }
  fail(ErrorKind::kBudgetExceeded, "split_until_near_id: no near-Id split up to n = " +
                                       std::to_string(cap) +
                                       " (last max op norm " + std::to_string(s.max_op_norm) + ")");
}

// Shared state of one factorization: factor m's h evaluates f after undoing
// the factors m+1..d, each of which is a bracketed root find of its own h.
class TriangularChain {
 public:
  TriangularChain(SmoothMap f, std::vector<double> lo, std::vector<double> hi, double tol)
      : f_(std::move(f)), lo_(std::move(lo)), hi_(std::move(hi)), tol_(tol),
        direction_(f_.dim, 1) {}

  int dim() const { return f_.dim; }
  void set_direction(int i, int dir) { direction_[i] = dir; }

  // 0-based m: h_m(x) = f(F_{d-1}^{-1}( ... F_{m+1}^{-1}(x)))_m.
  double h(int m, const Vec& x) const {
    Vec z = x;
    for (int j = m + 1; j < dim(); ++j) z = inverse(j, z);
    return f_(z)[m];
  }

  Vec inverse(int j, const Vec& y) const {
    Vec z = y;
    const ScalarFn g = [&](double v) {
      z[j] = v;
      return h(j, z);
    };
    const double v = solve_monotone(g, nullptr, y[j], lo_[j], hi_[j], direction_[j] > 0,
                                    {tol_, 60, 400});
    z[j] = v;
    return z;
  }

 private:
  SmoothMap f_;
  std::vector<double> lo_, hi_;
  double tol_;
  std::vector<int> direction_;
};

double SingleCoordinateFactor::h(const Vec& x) const { return chain->h(index, x); }

Vec SingleCoordinateFactor::apply(const Vec& x) const {
  Vec y = x;
  y[index] = h(x);
  return y;
}

Vec SingleCoordinateFactor::invert(const Vec& y) const { return chain->inverse(index, y); }

Vec recompose(const Factorization& fz, const Vec& x) {
  Vec z = x;
  for (std::size_t k = fz.factors.size(); k-- > 0;) z = fz.factors[k].apply(z);
  return z;
}

namespace {

// Sign of x_i -> h_i along a 100-point sweep through the box centre; 0 if
// the sweep is not strictly monotone.
int sweep_direction(const SingleCoordinateFactor& f, const Box& box, const Vec& base) {
  Vec x = base;
  int dir = 0;
  double prev = 0.0;
  for (int s = 0; s < 100; ++s) {
    x[f.index] = box.lo[f.index] + (box.hi[f.index] - box.lo[f.index]) * s / 99.0;
    const double v = f.h(x);
    if (s > 0) {
      const int step = v > prev ? 1 : (v < prev ? -1 : 0);
      if (step == 0 || (dir != 0 && step != dir)) return 0;
      dir = step;
    }
    prev = v;
  }
  return dir;
}

}  // namespace

Factorization triangular_factorize(const SmoothMap& f, const Box& box, double tol, int grid_n,
                                   int probe_n) {
  const int d = f.dim;
  require_dim(box.dim(), d, "triangular_factorize");
  if (!(tol > 0.0)) fail(ErrorKind::kInvalidArgument, "triangular_factorize: tol must be > 0");

  double displacement = 0.0;
  for_each_node(box, probe_n, [&](const Vec& x) {
    const int k = first_vanishing_trailing_minor(jacobian(f, x));
    if (k != 0) {
      fail(ErrorKind::kHypothesis, "triangular_factorize: trailing " + std::to_string(k) + "x" +
                                       std::to_string(k) + " minor vanishes at (" + format_point(x) + ")");
    }
    displacement = std::max(displacement, (f(x) - x).cwiseAbs().maxCoeff());
  });

  std::vector<double> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = box.lo[i] - displacement - 1.0;
    hi[i] = box.hi[i] + displacement + 1.0;
  }
  auto chain = std::make_shared<TriangularChain>(f, lo, hi, tol);

  Factorization fz;
  fz.tol = tol;
  fz.grid_n = grid_n;
  fz.box = box;
  fz.monotone_sweeps_ok = true;
  const Vec centre = 0.5 * (box.lo + box.hi);
  // Directions are fixed innermost first: factor m's sweep calls the inverses of m+1..d.
  fz.factors.resize(d);
  for (int m = d - 1; m >= 0; --m) {
    SingleCoordinateFactor& fac = fz.factors[m];
    fac.index = m;
    fac.chain = chain;
    fac.direction = sweep_direction(fac, box, centre);
    if (fac.direction == 0) {
      fz.monotone_sweeps_ok = false;
      fail(ErrorKind::kHypothesis, "triangular_factorize: factor " + std::to_string(m + 1) +
                                       " is not strictly monotone along its coordinate");
    }
    chain->set_direction(m, fac.direction);
  }

  for_each_node(box, grid_n, [&](const Vec& x) {
    fz.recomposition_error =
        std::max(fz.recomposition_error, (recompose(fz, x) - f(x)).cwiseAbs().maxCoeff());
  });
  return fz;
}

SmoothMap as_last_coordinate_map(const SingleCoordinateFactor& factor, int dim) {
  const PermutationLayer swap = transposition(dim, factor.index, dim - 1);
  return {dim,
          [factor, swap, dim](const Vec& x) {
            // In the swapped frame only the last slot changes.
            Vec z = layer_forward(swap, x);
            z[dim - 1] = factor.h(layer_forward(swap, z));
            return layer_forward(swap, z);
          },
          {}};
}

Json to_json(const Factorization& fz) {
  Json factors = Json::array();
  for (const auto& f : fz.factors) {
    factors.push_back({{"index", f.index + 1},
                       {"direction", f.direction > 0 ? "increasing" : "decreasing"}});
  }
  return {{"factors", factors},
          {"recomposition_error", fz.recomposition_error},
          {"tol", fz.tol},
          {"monotone_sweeps_ok", fz.monotone_sweeps_ok},
          {"grid", {{"n", fz.grid_n},
                    {"lo", std::vector<double>(fz.box.lo.data(), fz.box.lo.data() + fz.box.dim())},
                    {"hi", std::vector<double>(fz.box.hi.data(), fz.box.hi.data() + fz.box.dim())}}},
          {"certified_on", "validation grid over the working box only"}};
}

}  // namespace flowlab
