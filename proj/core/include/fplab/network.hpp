#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fplab/numerics.hpp"

namespace fplab {

/// One affine map. weights is out_dim x in_dim, row-major.
struct Layer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t in_dim() const noexcept { return weights.cols(); }
  std::size_t out_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct InitSpec {
  double weight_std = 0.1;
  double bias_std = 0.1;
  double mean = 0.0;
  std::uint64_t seed = 1;

  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

/// Parameters of a tanh MLP: tanh after every layer except the last, which is linear.
///
/// For a network with dims {1, N, 1} the parameters map onto the
/// one-hidden-layer form  y(x) = sum_j a_j tanh(w_j x + b_j) + c  with
///   w_j = layers[0].weights(j, 0),  b_j = layers[0].bias[j],
///   a_j = layers[1].weights(0, j),  c   = layers[1].bias[0].
/// The same type also holds gradients and optimizer moments ("shaped like").
struct NetworkParams {
  std::vector<Layer> layers;
  InitSpec init;

  std::vector<std::size_t> layer_dims() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  bool same_shape(const NetworkParams& other) const;

  // Flat views over every parameter block in declaration order:
  // layer 0 weights, layer 0 bias, layer 1 weights, ...
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

NetworkParams zeros_like(const NetworkParams& net);

/// Builds a zero network with the given dims (>= 2 entries, all >= 1).
NetworkParams make_network(std::span<const std::size_t> layer_dims);

/// Gaussian initialization: every weight ~ N(mean, weight_std^2), every bias
/// ~ N(mean, bias_std^2). Draw order is layer by layer, weights row-major then bias.
NetworkParams init_network(std::span<const std::size_t> layer_dims, const InitSpec& spec);

/// Builds the {1, N, 1} network y(x) = sum_j a_j tanh(w_j x + b_j) + output_bias.
NetworkParams make_single_hidden(std::span<const double> a, std::span<const double> w, std::span<const double> b,
                                 double output_bias = 0.0);

std::vector<double> forward(const NetworkParams& net, std::span<const double> input);

/// Row-per-sample batched forward pass.
Matrix forward_batch(const NetworkParams& net, const Matrix& inputs);

enum class Reduction {
  kSum,   // 1/2 * sum over samples and outputs
  kMean,  // the above divided by the number of samples
};

struct LossAndGradient {
  double loss = 0.0;
  NetworkParams gradient;
};

/// Loss 1/2 * sum_i |net(x_i) - y_i|^2 (optionally divided by the batch size)
/// and its exact reverse-mode gradient.
LossAndGradient backward_mse(const NetworkParams& net, const Matrix& inputs, const Matrix& targets,
                             Reduction reduction = Reduction::kSum);

double mse_loss(const NetworkParams& net, const Matrix& inputs, const Matrix& targets,
                Reduction reduction = Reduction::kSum);

/// Mean and (population) standard deviation of |weight| and |bias| over all layers.
struct ParamStats {
  double mean_abs_weight = 0.0;
  double std_abs_weight = 0.0;
  double mean_abs_bias = 0.0;
  double std_abs_bias = 0.0;
};

ParamStats param_stats(const NetworkParams& net);

/// Spectral norm per layer: power iteration for matrices, L2 norm when the
/// weight is a single row or column.
std::vector<double> layer_spectral_norms(const NetworkParams& net, int iterations = 10);

}  // namespace fplab
