#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "flowlab/inn.hpp"
#include "flowlab/numerics.hpp"
#include "support.hpp"

namespace testing {

using namespace flowlab;

// Softmax weights over `n` components, each logit linear in the prefix.
inline DsfLayer random_dsf(int d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DsfLayer l;
  l.dim = d;
  l.components = n;
  l.weight.resize(d);
  l.bias.resize(d);
  l.temperature.resize(d);
  for (int c = 0; c < d; ++c) {
    const Mat logits = testing::random_matrix(rng, n, c + 1, 0.5);
    for (int j = 0; j < n; ++j) {
      l.weight[c].push_back(closure_field(c, [logits, j, c](const Vec& x) {
        Vec z = logits.col(c);
        if (c > 0) z += logits.leftCols(c) * x;
        const double m = z.maxCoeff();
        return std::exp(z[j] - m) / (z.array() - m).exp().sum();
      }));
      const Vec wb = testing::random_matrix(rng, c + 1, 1, 0.7).col(0);
      l.bias[c].push_back(linear_field(wb.head(c), wb[c]));
      const Vec wt = testing::random_matrix(rng, c + 1, 1, 0.3).col(0);
      l.temperature[c].push_back(closure_field(
          c, [wt, c](const Vec& x) { return 0.3 + 0.5 * sigmoid(wt.head(c).dot(x) + wt[c]); }));
    }
  }
  return l;
}

inline SosLayer random_sos(int d, int degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SosLayer l{d, {}, {}};
  const Vec wc = testing::random_matrix(rng, d, 1).col(0);
  l.offset = linear_field(wc.head(d - 1), wc[d - 1]);
  for (int k = 0; k <= degree; ++k) {
    const Vec w = testing::random_matrix(rng, d, 1, 0.5).col(0);
    // Keep h_0 away from zero so the map is strictly increasing.
    const double bias = k == 0 ? 1.0 + std::abs(w[d - 1]) : w[d - 1];
    l.coeffs.push_back(linear_field(w.head(d - 1) * (k == 0 ? 0.1 : 1.0), bias));
  }
  return l;
}

inline AcfLayer random_acf(int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AcfLayer l{d, k, {}, {}};
  for (int i = 0; i < d - k; ++i) {
    const Vec ws = testing::random_matrix(rng, k + 1, 1, 0.4).col(0);
    l.scale.push_back(closure_field(k, [ws, k](const Vec& x) {
      return std::tanh(ws.head(k).dot(x) + ws[k]);
    }));
    const Vec wt = testing::random_matrix(rng, k + 1, 1).col(0);
    l.shift.push_back(linear_field(wt.head(k), wt[k]));
  }
  return l;
}

inline std::vector<Layer> sample_layers() {
  std::mt19937_64 rng(3);
  Mat a = testing::random_matrix(rng, 3, 3) + 2.0 * Mat::Identity(3, 3);
  std::vector<Layer> ls;
  ls.emplace_back(random_acf(3, 1, 11));
  ls.emplace_back(random_acf(3, 2, 12));
  ls.emplace_back(random_dsf(3, 3, 13));
  ls.emplace_back(random_sos(3, 2, 14));
  ls.emplace_back(PermutationLayer({2, 0, 1}));
  ls.emplace_back(AffineLayer(a, Vec::LinSpaced(3, -1.0, 1.0)));
  return ls;
}

}  // namespace testing
