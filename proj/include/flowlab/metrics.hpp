#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/grid.hpp"

namespace flowlab {

inline constexpr long kW1CellBudget = 4096;
inline constexpr long kDudleyCellBudget = 2048;
inline constexpr double kCertificateSlack = 1e-9;

/// sum |w_mu - w_nu|: the IPM over ||f||_inf <= 1.
double tv_ipm(const GridMeasure& mu, const GridMeasure& nu);
/// sup_A |mu(A) - nu(A)|, computed as the positive part of mu - nu.
double tv_sup_a(const GridMeasure& mu, const GridMeasure& nu);

/// Optimal transport cost between two weightings of the same points.
/// `supply` and `demand` are nonnegative with equal sums; `cost(i, j)` is
/// the cost of moving a unit from point i to point j. Returns the cost and,
/// optionally, the plan as (i, j, mass) triples.
struct Shipment {
  int from;
  int to;
  double mass;
};
double transport_cost(const Vec& supply, const Vec& demand,
                      const std::function<double(int, int)>& cost,
                      std::vector<Shipment>* plan = nullptr);

/// Exact W1 with Euclidean cell-centre costs. d = 1 uses the CDF formula;
/// otherwise min-cost flow. Throws kBudgetExceeded above 4096 cells.
double w1(const GridMeasure& mu, const GridMeasure& nu);

/// Dudley metric: sup of int f d(mu - nu) over ||f||_inf + Lip(f) <= 1 on the
/// cell centres. Throws kBudgetExceeded above 2048 cells.
double dudley(const GridMeasure& mu, const GridMeasure& nu);

/// Same as above for signed weights on an explicit point set (used by the
/// public grid versions and by tests on arbitrary supports).
double w1_points(const Mat& points, const Vec& signed_mass);
double dudley_points(const Mat& points, const Vec& signed_mass);

struct Kernel {
  enum class Kind { kGaussian, kLaplacian, kCustom };
  Kind kind = Kind::kGaussian;
  double gamma = 1.0;
  double sup_diag = 1.0;
  std::function<double(const Vec&, const Vec&)> custom;
  bool psd_attested = false;

  static Kernel gaussian(double gamma);
  static Kernel laplacian(double gamma);
  /// Custom kernels must come with an explicit PSD attestation to be used.
  static Kernel custom_kernel(std::function<double(const Vec&, const Vec&)> k, double sup_diag,
                              bool psd_attested);

  double operator()(const Vec& x, const Vec& y) const;
  std::string name() const;
};

/// sqrt(a^T K a) for signed weights a over the columns of `points`.
double mmd_signed(const Mat& points, const Vec& a, const Kernel& k);
/// Equal-weight samples.
double mmd(const SampleSet& x, const SampleSet& y, const Kernel& k);
double mmd_grid(const GridMeasure& mu, const GridMeasure& nu, const Kernel& k);

struct Truncation {
  std::optional<GridMeasure> measure;  // nullopt is the zero measure
  double mass = 0.0;                   // mu(K) before renormalization
};

/// mu restricted to the cells whose centres lie in K, renormalized; the zero
/// flag is raised when mu(K) <= 1e-15.
Truncation truncate(const GridMeasure& mu, const Box& k);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = true;
  bool hypothesis_met = true;
};

struct CertificateReport {
  double tv = 0.0;
  double tv_sup = 0.0;
  double w1 = 0.0;
  double dudley = 0.0;
  double mmd = 0.0;
  double support_diameter = 0.0;
  std::vector<BoundCheck> bounds;

  bool all_pass() const;
};

/// Checks Dudley <= TV, MMD <= sqrt(sup k) TV, W1 <= R sup_A-TV (R the
/// diameter of the support hull) and, when TV < nu(K), the truncated bound
/// W1(mu|K, nu|K) <= (4 diam K / nu(K)) TV / (nu(K) - TV).
CertificateReport certify_bounds(const GridMeasure& mu, const GridMeasure& nu, const Box& k,
                                 const Kernel& kernel);

Json to_json(const CertificateReport& r);

}  // namespace flowlab
