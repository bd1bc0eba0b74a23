#include "flowlab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace flowlab {

namespace {

void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 2 || widths.back() != 1) {
    fail(ErrorKind::kInvalidArgument, "Mlp: widths must be [m, ..., 1]");
  }
  for (int w : widths) {
    if (w < 1) fail(ErrorKind::kInvalidArgument, "Mlp: widths must be positive");
  }
}

Mat activate(const Mat& z, Activation act) {
  if (act == Activation::kRelu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative of the activation expressed through pre-activation z and output a.
Mat activate_grad(const Mat& z, const Mat& a, Activation act) {
  if (act == Activation::kRelu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - a.array().square()).matrix();
}

const char* act_name(Activation act) { return act == Activation::kRelu ? "relu" : "tanh"; }

Activation act_from_name(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  fail(ErrorKind::kInvalidArgument, "unknown activation '" + s + "'");
}

struct Trace {
  std::vector<Mat> pre;   // z_l for l = 0..L-1
  std::vector<Mat> post;  // a_0 = input, a_l = act(z_{l-1}) for hidden, last = output
};

Trace forward_trace(const Mlp& net, const Mat& xs) {
  Trace tr;
  tr.post.push_back(xs);
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    Mat z = net.weights[l] * tr.post.back();
    z.colwise() += net.biases[l];
    tr.pre.push_back(z);
    tr.post.push_back(l + 1 < layers ? activate(z, net.activation) : z);
  }
  return tr;
}

// Backpropagates output cotangents (1 x N) into parameter gradients summed
// over columns, and returns the input cotangent.
Mat backprop(const Mlp& net, const Trace& tr, Mat grad_out, std::vector<Mat>* dw,
             std::vector<Vec>* db) {
  const int layers = net.layer_count();
  Mat g = std::move(grad_out);
  for (int l = layers - 1; l >= 0; --l) {
    if (l + 1 < layers) {
      g = g.cwiseProduct(activate_grad(tr.pre[l], tr.post[l + 1], net.activation));
    }
    if (dw != nullptr) {
      (*dw)[l] = g * tr.post[l].transpose();
      (*db)[l] = g.rowwise().sum();
    }
    g = net.weights[l].transpose() * g;
  }
  return g;
}

}  // namespace

Mlp Mlp::zeros(std::vector<int> widths, Activation act) {
  check_widths(widths);
  Mlp net;
  net.widths = std::move(widths);
  net.activation = act;
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    net.weights.push_back(Mat::Zero(net.widths[l + 1], net.widths[l]));
    net.biases.push_back(Vec::Zero(net.widths[l + 1]));
  }
  return net;
}

Mlp Mlp::random(std::vector<int> widths, Activation act, std::uint64_t seed) {
  Mlp net = zeros(std::move(widths), act);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.widths[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < net.weights[l].size(); ++i) net.weights[l].data()[i] = u(rng);
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) net.biases[l][i] = u(rng);
  }
  return net;
}

int Mlp::parameter_count() const {
  int n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += widths[l] * widths[l + 1] + widths[l + 1];
  return n;
}

Vec Mlp::parameters() const {
  Vec theta(parameter_count());
  Eigen::Index at = 0;
  for (int l = 0; l < layer_count(); ++l) {
    theta.segment(at, weights[l].size()) = Eigen::Map<const Vec>(weights[l].data(), weights[l].size());
    at += weights[l].size();
    theta.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return theta;
}

void Mlp::set_parameters(const Vec& theta) {
  require_dim(theta.size(), parameter_count(), "Mlp::set_parameters");
  Eigen::Index at = 0;
  for (int l = 0; l < layer_count(); ++l) {
    Eigen::Map<Vec>(weights[l].data(), weights[l].size()) = theta.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = theta.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

double mlp_eval(const Mlp& net, const Vec& x) {
  require_dim(x.size(), net.input_dim(), "mlp_eval");
  Vec a = x;
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    Vec z = net.weights[l] * a + net.biases[l];
    if (l + 1 < layers) z = activate(z, net.activation);
    a = std::move(z);
  }
  return a[0];
}

Vec mlp_eval_batch(const Mlp& net, const Mat& xs) {
  require_dim(xs.rows(), net.input_dim(), "mlp_eval_batch");
  return forward_trace(net, xs).post.back().row(0).transpose();
}

Vec mlp_param_gradient(const Mlp& net, const Vec& x) {
  require_dim(x.size(), net.input_dim(), "mlp_param_gradient");
  const Trace tr = forward_trace(net, x);
  std::vector<Mat> dw(net.layer_count());
  std::vector<Vec> db(net.layer_count());
  backprop(net, tr, Mat::Ones(1, 1), &dw, &db);
  Mlp shaped = net;
  shaped.weights = dw;
  shaped.biases = db;
  return shaped.parameters();
}

Vec mlp_input_gradient(const Mlp& net, const Vec& x) {
  require_dim(x.size(), net.input_dim(), "mlp_input_gradient");
  const Trace tr = forward_trace(net, x);
  return backprop(net, tr, Mat::Ones(1, 1), nullptr, nullptr).col(0);
}

double mlp_lipschitz_bound(const Mlp& net, int power_iters) {
  double bound = 1.0;
  for (const Mat& w : net.weights) {
    const Mat gram = w.transpose() * w;
    Vec v = Vec::Ones(gram.cols()).normalized();
    double sigma2 = 0.0;
    for (int it = 0; it < power_iters; ++it) {
      Vec next = gram * v;
      sigma2 = next.norm();
      if (sigma2 == 0.0) break;
      v = next / sigma2;
    }
    // Power iteration converges from below; pad by the residual of the final
    // Rayleigh quotient so the product stays an upper bound.
    const double rayleigh = v.dot(gram * v);
    const double resid = (gram * v - rayleigh * v).norm();
    bound *= std::sqrt(std::max(sigma2, rayleigh) + resid);
  }
  return bound;
}

MlpFitResult mlp_fit(const ScalarField& target, const Box& box, const MlpFitOptions& opts) {
  if (opts.n_samples < 16) fail(ErrorKind::kInvalidArgument, "mlp_fit: n_samples must be >= 16");
  for (int i = 0; i < box.dim(); ++i) {
    if (!(box.hi[i] > box.lo[i])) fail(ErrorKind::kInvalidArgument, "mlp_fit: degenerate box");
  }
  if (opts.widths.front() != box.dim() || target.arity != box.dim()) {
    fail(ErrorKind::kDimensionMismatch, "mlp_fit: input width, target arity and box must agree");
  }

  std::mt19937_64 rng(opts.seed);
  const int n = opts.n_samples;
  const int d = box.dim();
  Mat xs(d, n);
  Vec ys(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < d; ++i) xs(i, s) = box.lo[i] + (box.hi[i] - box.lo[i]) * unit(rng);
    ys[s] = target.eval(xs.col(s));
  }

  MlpFitResult result;
  result.net = Mlp::random(opts.widths, opts.activation, rng());
  Mlp& net = result.net;
  const int batch = opts.batch_size > 0 ? std::min(opts.batch_size, n) : n;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Mat> dw(net.layer_count());
  std::vector<Vec> db(net.layer_count());

  auto full_mse = [&]() {
    return (mlp_eval_batch(net, xs) - ys).squaredNorm() / n;
  };

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += batch) {
      const int m = std::min(batch, n - start);
      Mat xb(d, m);
      Vec yb(m);
      for (int s = 0; s < m; ++s) {
        const int idx = batch < n ? order[start + s] : start + s;
        xb.col(s) = xs.col(idx);
        yb[s] = ys[idx];
      }
      const Trace tr = forward_trace(net, xb);
      const Vec resid = tr.post.back().row(0).transpose() - yb;
      const double loss = resid.squaredNorm() / m;
      if (!std::isfinite(loss)) {
        fail(ErrorKind::kNonFinite, "mlp_fit: non-finite loss at epoch " + std::to_string(epoch) +
                                        " (lr=" + std::to_string(opts.lr) + ")");
      }
      backprop(net, tr, (2.0 / m) * resid.transpose(), &dw, &db);
      for (int l = 0; l < net.layer_count(); ++l) {
        net.weights[l] -= opts.lr * dw[l];
        net.biases[l] -= opts.lr * db[l];
      }
    }
    result.epochs_run = epoch + 1;
    if (opts.target_mse > 0.0 && full_mse() <= opts.target_mse) break;
  }
  result.final_mse = full_mse();
  if (!std::isfinite(result.final_mse)) {
    fail(ErrorKind::kNonFinite, "mlp_fit: non-finite final loss");
  }
  return result;
}

Json mlp_to_json(const Mlp& net) {
  Json layers = Json::array();
  for (int l = 0; l < net.layer_count(); ++l) {
    const Mat& w = net.weights[l];
    std::vector<double> flat;
    flat.reserve(w.size());
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    layers.push_back({{"weights", flat},
                      {"biases", std::vector<double>(net.biases[l].data(),
                                                     net.biases[l].data() + net.biases[l].size())}});
  }
  return {{"widths", net.widths}, {"activation", act_name(net.activation)}, {"layers", layers}};
}

Mlp mlp_from_json(const Json& j) {
  Mlp net = Mlp::zeros(j.at("widths").get<std::vector<int>>(),
                       act_from_name(j.at("activation").get<std::string>()));
  const Json& layers = j.at("layers");
  if (static_cast<int>(layers.size()) != net.layer_count()) {
    fail(ErrorKind::kInvalidArgument, "mlp_from_json: layer count does not match widths");
  }
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto w = layers[l].at("weights").get<std::vector<double>>();
    const auto b = layers[l].at("biases").get<std::vector<double>>();
    Mat& dst = net.weights[l];
    if (static_cast<Eigen::Index>(w.size()) != dst.size() ||
        static_cast<Eigen::Index>(b.size()) != net.biases[l].size()) {
      fail(ErrorKind::kInvalidArgument, "mlp_from_json: weight array has wrong length");
    }
    for (Eigen::Index r = 0; r < dst.rows(); ++r) {
      for (Eigen::Index c = 0; c < dst.cols(); ++c) dst(r, c) = w[r * dst.cols() + c];
    }
    net.biases[l] = Eigen::Map<const Vec>(b.data(), b.size());
  }
  return net;
}

ScalarField as_scalar_field(const Mlp& net) {
  ScalarField f;
  f.arity = net.input_dim();
  f.eval = [net](const Vec& x) { return mlp_eval(net, x); };
  f.gradient = [net](const Vec& x) { return mlp_input_gradient(net, x); };
  f.spec = {{"builtin", "mlp"}, {"arity", f.arity}, {"net", mlp_to_json(net)}};
  return f;
}

}  // namespace flowlab
