#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace flowlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorKind {
  kDimensionMismatch,
  kInvalidArgument,
  kSaturation,
  kInvariantViolation,
  kBracketNotFound,
  kNonFinite,
  kNotSerializable,
  kBudgetExceeded,
  kSingular,
  kHypothesis,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. `kind()` lets callers branch on the failure class
/// without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* where) {
  if (got != want) {
    fail(ErrorKind::kDimensionMismatch, std::string(where) + ": expected dimension " +
                                            std::to_string(want) + ", got " +
                                            std::to_string(got));
  }
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// "x0,x1,..." for error messages.
inline std::string format_point(const Vec& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
  return s;
}

/// Axis-aligned compact box [lo_1, hi_1] x ... x [lo_d, hi_d].
struct Box {
  Vec lo;
  Vec hi;

  Box() = default;
  Box(Vec lo_, Vec hi_);

  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(const Vec& x, double slack = 0.0) const;
  Box inflated(double margin) const;
  bool contains_box(const Box& other) const;
};

/// Regular node grid over a box, `n` nodes per axis (endpoints included).
/// Calls `fn(x)` for every node in row-major order.
template <typename Fn>
void for_each_node(const Box& box, int n, Fn&& fn) {
  const int d = box.dim();
  long total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  Vec x(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = d - 1; i >= 0; --i) {
      const long k = rem % n;
      rem /= n;
      x[i] = n == 1 ? 0.5 * (box.lo[i] + box.hi[i])
                    : box.lo[i] + (box.hi[i] - box.lo[i]) * static_cast<double>(k) / (n - 1);
    }
    fn(static_cast<const Vec&>(x));
  }
}

}  // namespace flowlab
