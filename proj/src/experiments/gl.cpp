#include <cmath>
#include <random>

#include "common.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/inn.hpp"
#include "flowlab/tolerances.hpp"

namespace flowlab {

Report exp_gl(const Config& c, std::uint64_t seed) {
  const int trials = c.get_int("trials", 100);
  const int probes = c.get_int("probes", 20);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-2.0, 2.0);

  int passed = 0;
  double worst = 0.0, worst_cond = 0.0;
  for (int t = 0; t < trials; ++t) {
    Mat a(3, 3);
    Vec b(3);
    do {
      for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = g(rng);
    } while (std::abs(a.determinant()) < 1e-3);
    for (int i = 0; i < 3; ++i) b[i] = g(rng);
    const Inn inn = realize_gl(a, b);
    double err = 0.0;
    for (int p = 0; p < probes; ++p) {
      const Vec x = (Vec(3) << u(rng), u(rng), u(rng)).finished();
      err = std::max(err, (inn_forward(inn, x) - (a * x + b)).cwiseAbs().maxCoeff());
    }
    const auto [ma, mb] = affine_part(inn);
    err = std::max({err, (ma - a).cwiseAbs().maxCoeff(), (mb - b).cwiseAbs().maxCoeff()});
    worst = std::max(worst, err);
    const Eigen::JacobiSVD<Mat> svd(a);
    worst_cond = std::max(worst_cond, svd.singularValues()[0] / svd.singularValues()[2]);
    passed += err <= tol::kGlReconstruction;
  }

  const Inn flip(2, sign_flip_layers(2, 0, 1));
  const auto [fa, fb] = affine_part(flip);
  const Mat want = (Mat(2, 2) << -1.0, 0.0, 0.0, 1.0).finished();
  const double flip_err = std::max((fa - want).cwiseAbs().maxCoeff(), fb.cwiseAbs().maxCoeff());

  Report r;
  r.results = {{"trials", trials},
               {"passed", passed},
               {"worst_error", worst},
               {"worst_condition_number", worst_cond},
               {"sign_flip_layers", static_cast<int>(flip.size())},
               {"sign_flip_error", flip_err}};
  r.checks.push_back(check_eq("reconstructions_pass", passed, trials));
  r.checks.push_back(check_eq("sign_flip_layer_count", static_cast<double>(flip.size()), 6.0));
  r.checks.push_back(check_le("sign_flip_identity", flip_err, tol::kSignFlipIdentity));
  return r;
}

}  // namespace flowlab
