#pragma once

#include <random>
#include <vector>

#include "flowlab/core.hpp"

namespace testing {

inline flowlab::Vec uniform_point(std::mt19937_64& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  flowlab::Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

inline std::vector<flowlab::Vec> probes(std::uint64_t seed, int n, int d, double lo = -2.0,
                                        double hi = 2.0) {
  std::mt19937_64 rng(seed);
  std::vector<flowlab::Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(uniform_point(rng, d, lo, hi));
  return out;
}

inline flowlab::Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  flowlab::Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = g(rng);
  }
  return m;
}

}  // namespace testing
