#include "fplab/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fplab/error.hpp"

namespace fplab {

namespace {

void check_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw InvalidArgument("network needs at least 2 layer dims (input, output)");
  for (std::size_t d : dims) {
    if (d < 1) throw InvalidArgument("network layer dims must be >= 1");
  }
}

void add_bias_rows(Matrix& z, const std::vector<double>& bias) {
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = bias[c];
  }
}

void check_batch(const NetworkParams& net, const Matrix& inputs, const Matrix& targets) {
  if (net.layers.empty()) throw InvalidArgument("network has no layers");
  if (inputs.rows() == 0) throw InvalidArgument("backward_mse: empty batch");
  if (inputs.rows() != targets.rows()) throw InvalidArgument("backward_mse: input and target counts differ");
  if (inputs.cols() != net.input_dim()) {
    throw InvalidArgument("input width " + std::to_string(inputs.cols()) + " does not match network input dim " +
                          std::to_string(net.input_dim()));
  }
  if (targets.cols() != net.output_dim()) {
    throw InvalidArgument("target width " + std::to_string(targets.cols()) + " does not match network output dim " +
                          std::to_string(net.output_dim()));
  }
}

// Returns the post-activation of every layer; acts[0] is the input.
std::vector<Matrix> forward_all(const NetworkParams& net, const Matrix& inputs) {
  std::vector<Matrix> acts;
  acts.reserve(net.layers.size() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    Matrix z(inputs.rows(), layer.out_dim());
    add_bias_rows(z, layer.bias);
    gemm_accumulate(acts.back(), transpose(layer.weights), z);
    if (l + 1 < net.layers.size()) {
      for (auto& v : z.values()) v = std::tanh(v);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

std::vector<std::size_t> NetworkParams::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers.empty()) return dims;
  dims.push_back(layers.front().in_dim());
  for (const auto& l : layers) dims.push_back(l.out_dim());
  return dims;
}

std::size_t NetworkParams::input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }

std::size_t NetworkParams::output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weights.rows() != other.layers[i].weights.rows() ||
        layers[i].weights.cols() != other.layers[i].weights.cols() ||
        layers[i].bias.size() != other.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

std::vector<std::span<double>> NetworkParams::blocks() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weights.values());
    out.emplace_back(l.bias);
  }
  return out;
}

std::vector<std::span<const double>> NetworkParams::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers) {
    out.emplace_back(l.weights.values());
    out.emplace_back(l.bias);
  }
  return out;
}

NetworkParams zeros_like(const NetworkParams& net) {
  NetworkParams z;
  z.init = net.init;
  z.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    z.layers.push_back(Layer{Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size(), 0.0)});
  }
  return z;
}

NetworkParams make_network(std::span<const std::size_t> layer_dims) {
  check_dims(layer_dims);
  NetworkParams net;
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    net.layers.push_back(
        Layer{Matrix(layer_dims[i + 1], layer_dims[i]), std::vector<double>(layer_dims[i + 1], 0.0)});
  }
  return net;
}

NetworkParams init_network(std::span<const std::size_t> layer_dims, const InitSpec& spec) {
  if (!(spec.weight_std >= 0.0) || !(spec.bias_std >= 0.0)) {
    throw InvalidArgument("init_network: standard deviations must be >= 0");
  }
  NetworkParams net = make_network(layer_dims);
  net.init = spec;
  SeededRng rng(spec.seed);
  for (auto& layer : net.layers) {
    for (auto& w : layer.weights.values()) w = rng.gaussian(spec.mean, spec.weight_std);
    for (auto& b : layer.bias) b = rng.gaussian(spec.mean, spec.bias_std);
  }
  return net;
}

NetworkParams make_single_hidden(std::span<const double> a, std::span<const double> w, std::span<const double> b,
                                 double output_bias) {
  if (a.size() != w.size() || a.size() != b.size() || a.empty()) {
    throw InvalidArgument("make_single_hidden: a, w, b must be non-empty and equally long");
  }
  const std::size_t n = a.size();
  const std::size_t dims[] = {1, n, 1};
  NetworkParams net = make_network(dims);
  for (std::size_t j = 0; j < n; ++j) {
    net.layers[0].weights(j, 0) = w[j];
    net.layers[0].bias[j] = b[j];
    net.layers[1].weights(0, j) = a[j];
  }
  net.layers[1].bias[0] = output_bias;
  return net;
}

std::vector<double> forward(const NetworkParams& net, std::span<const double> input) {
  if (net.layers.empty()) throw InvalidArgument("network has no layers");
  if (input.size() != net.input_dim()) {
    throw InvalidArgument("forward: input length " + std::to_string(input.size()) + " does not match network input dim " +
                          std::to_string(net.input_dim()));
  }
  std::vector<double> h(input.begin(), input.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    std::vector<double> z = matvec(layer.weights, h);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += layer.bias[i];
      if (l + 1 < net.layers.size()) z[i] = std::tanh(z[i]);
    }
    h = std::move(z);
  }
  return h;
}

Matrix forward_batch(const NetworkParams& net, const Matrix& inputs) {
  if (net.layers.empty()) throw InvalidArgument("network has no layers");
  if (inputs.cols() != net.input_dim()) {
    throw InvalidArgument("forward_batch: input width " + std::to_string(inputs.cols()) +
                          " does not match network input dim " + std::to_string(net.input_dim()));
  }
  auto acts = forward_all(net, inputs);
  return std::move(acts.back());
}

LossAndGradient backward_mse(const NetworkParams& net, const Matrix& inputs, const Matrix& targets,
                             Reduction reduction) {
  check_batch(net, inputs, targets);
  const auto acts = forward_all(net, inputs);
  const double scale = reduction == Reduction::kMean ? 1.0 / static_cast<double>(inputs.rows()) : 1.0;

  LossAndGradient out;
  out.gradient = zeros_like(net);

  // delta = dLoss/dz for the current layer's pre-activation.
  Matrix delta(targets.rows(), targets.cols());
  double loss = 0.0;
  {
    const Matrix& y = acts.back();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y.data()[i] - targets.data()[i];
      loss += r * r;
      delta.data()[i] = scale * r;
    }
  }
  out.loss = 0.5 * scale * loss;

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    Layer& g = out.gradient.layers[l];
    gemm_tn_accumulate(delta, acts[l], g.weights);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) g.bias[c] += row[c];
    }
    if (l == 0) break;
    Matrix upstream(delta.rows(), net.layers[l].in_dim());
    gemm_accumulate(delta, net.layers[l].weights, upstream);
    const Matrix& h = acts[l];
    for (std::size_t i = 0; i < upstream.size(); ++i) {
      const double t = h.data()[i];
      upstream.data()[i] *= 1.0 - t * t;
    }
    delta = std::move(upstream);
  }
  return out;
}

double mse_loss(const NetworkParams& net, const Matrix& inputs, const Matrix& targets, Reduction reduction) {
  check_batch(net, inputs, targets);
  const Matrix y = forward_batch(net, inputs);
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y.data()[i] - targets.data()[i];
    loss += r * r;
  }
  const double scale = reduction == Reduction::kMean ? 1.0 / static_cast<double>(inputs.rows()) : 1.0;
  return 0.5 * scale * loss;
}

namespace {

void mean_std_abs(std::span<const double> values, double& sum, double& sum_sq, std::size_t& count) {
  for (double v : values) {
    const double a = std::abs(v);
    sum += a;
    sum_sq += a * a;
  }
  count += values.size();
}

void finish(double sum, double sum_sq, std::size_t count, double& mean, double& std) {
  if (count == 0) {
    mean = std = 0.0;
    return;
  }
  const double n = static_cast<double>(count);
  mean = sum / n;
  std = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

}  // namespace

ParamStats param_stats(const NetworkParams& net) {
  double ws = 0, wss = 0, bs = 0, bss = 0;
  std::size_t wn = 0, bn = 0;
  for (const auto& l : net.layers) {
    mean_std_abs(l.weights.values(), ws, wss, wn);
    mean_std_abs(l.bias, bs, bss, bn);
  }
  ParamStats s;
  finish(ws, wss, wn, s.mean_abs_weight, s.std_abs_weight);
  finish(bs, bss, bn, s.mean_abs_bias, s.std_abs_bias);
  return s;
}

std::vector<double> layer_spectral_norms(const NetworkParams& net, int iterations) {
  std::vector<double> norms;
  norms.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    if (l.weights.rows() == 1 || l.weights.cols() == 1) {
      norms.push_back(vector_l2_norm(l.weights.values()));
    } else {
      norms.push_back(power_iteration_spectral_norm(l.weights, iterations));
    }
  }
  return norms;
}

}  // namespace fplab
