#pragma once

#include <vector>

#include "flowlab/config.hpp"
#include "flowlab/core.hpp"
#include "flowlab/smooth_map.hpp"

namespace flowlab::detail {

/// `key` holds either "lo,hi" (a cube) or 2*dim per-axis bounds.
inline Box box_from_config(const Config& c, const std::string& key, int dim, double lo, double hi) {
  if (!c.has(key)) return Box::cube(dim, lo, hi);
  const std::vector<double> v = parse_doubles(c.get_string(key, ""));
  if (v.size() == 2) return Box::cube(dim, v[0], v[1]);
  if (static_cast<int>(v.size()) != 2 * dim) {
    fail(ErrorKind::kInvalidArgument, key + ": expected 2 or " + std::to_string(2 * dim) + " numbers");
  }
  Vec l(dim), h(dim);
  for (int i = 0; i < dim; ++i) {
    l[i] = v[2 * i];
    h[i] = v[2 * i + 1];
  }
  return Box(l, h);
}

inline std::vector<double> to_vector(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

}  // namespace flowlab::detail
