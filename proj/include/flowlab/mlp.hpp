#pragma once

#include <cstdint>
#include <vector>

#include "flowlab/core.hpp"
#include "flowlab/scalar_field.hpp"

namespace flowlab {

enum class Activation { kRelu, kTanh };

/// Dense feed-forward net with scalar output. Hidden layers use `activation`,
/// the output layer is affine. weights[l] has shape widths[l+1] x widths[l].
struct Mlp {
  std::vector<int> widths;
  Activation activation = Activation::kTanh;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  static Mlp zeros(std::vector<int> widths, Activation act);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
  static Mlp random(std::vector<int> widths, Activation act, std::uint64_t seed);

  int input_dim() const { return widths.front(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  int parameter_count() const;

  Vec parameters() const;
  void set_parameters(const Vec& theta);
};

double mlp_eval(const Mlp& net, const Vec& x);

/// Batched evaluation, one sample per column.
Vec mlp_eval_batch(const Mlp& net, const Mat& xs);

/// d net(x) / d theta, flattened in `Mlp::parameters()` order.
Vec mlp_param_gradient(const Mlp& net, const Vec& x);

/// d net(x) / d x
Vec mlp_input_gradient(const Mlp& net, const Vec& x);

/// Product of per-layer spectral-norm estimates (power iteration). Both
/// builtin activations are 1-Lipschitz, so this bounds Lip(net).
double mlp_lipschitz_bound(const Mlp& net, int power_iters = 50);

struct MlpFitOptions {
  std::vector<int> widths{1, 16, 1};
  Activation activation = Activation::kTanh;
  int n_samples = 256;
  int epochs = 2000;
  double lr = 0.05;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 7;
  double target_mse = 0.0;  // stop early once the training MSE falls below this
};

struct MlpFitResult {
  Mlp net;
  double final_mse = 0.0;
  int epochs_run = 0;
};

/// Gradient descent on the mean squared error over uniform samples in `box`.
/// Deterministic for a fixed seed. Throws kNonFinite if the loss diverges.
MlpFitResult mlp_fit(const ScalarField& target, const Box& box, const MlpFitOptions& opts);

Json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

/// Wraps a net as a serializable conditioner handle with analytic gradient.
ScalarField as_scalar_field(const Mlp& net);

}  // namespace flowlab
