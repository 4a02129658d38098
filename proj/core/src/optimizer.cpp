#include "fplab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fplab/error.hpp"

namespace fplab {

AdamState::AdamState(const NetworkParams& like, AdamConfig config)
    : config_(config), m_(zeros_like(like)), v_(zeros_like(like)) {
  if (!(config_.learning_rate >= 0.0)) throw InvalidArgument("Adam learning rate must be >= 0");
}

void adam_step(AdamState& state, NetworkParams& net, const NetworkParams& grads) {
  if (!net.same_shape(grads)) throw InvalidArgument("adam_step: gradient is not shaped like the network");
  if (!net.same_shape(state.m_)) throw InvalidArgument("adam_step: optimizer state is not shaped like the network");

  const AdamConfig& c = state.config_;
  ++state.step_count_;
  const double t = static_cast<double>(state.step_count_);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  auto params = net.blocks();
  const auto g = grads.blocks();
  auto m = state.m_.blocks();
  auto v = state.v_.blocks();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double gi = g[b][i];
      m[b][i] = c.beta1 * m[b][i] + (1.0 - c.beta1) * gi;
      v[b][i] = c.beta2 * v[b][i] + (1.0 - c.beta2) * gi * gi;
      const double m_hat = m[b][i] / correction1;
      const double v_hat = v[b][i] / correction2;
      params[b][i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

void gradient_descent_step(NetworkParams& net, const NetworkParams& grads, double learning_rate) {
  if (!net.same_shape(grads)) throw InvalidArgument("gradient_descent_step: gradient is not shaped like the network");
  auto params = net.blocks();
  const auto g = grads.blocks();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) params[b][i] -= learning_rate * g[b][i];
  }
}

TrainResult train_loop(NetworkParams net, const Dataset& train, const TrainConfig& config,
                       std::span<const Observer> observers) {
  validate(train);
  if (train.empty()) throw InvalidArgument("train_loop: empty dataset");
  if (config.batch_size > train.size()) {
    throw InvalidArgument("train_loop: batch size " + std::to_string(config.batch_size) + " exceeds dataset size " +
                          std::to_string(train.size()));
  }
  if (config.epochs < 0) throw InvalidArgument("train_loop: epochs must be >= 0");
  if (config.recording_interval < 1) throw InvalidArgument("train_loop: recording_interval must be >= 1");

  const std::size_t n = train.size();
  const std::size_t batch = config.batch_size == 0 ? n : config.batch_size;
  const bool full_batch = batch == n;

  TrainResult result;
  AdamState adam(net, AdamConfig{.learning_rate = config.learning_rate});

  // Mini-batch buffers are reused across steps.
  Matrix xb, yb;

  for (long epoch = 1; epoch <= config.epochs; ++epoch) {
    if (full_batch) {
      const auto lg = backward_mse(net, train.inputs, train.targets, config.reduction);
      if (config.optimizer == OptimizerKind::kAdam) {
        adam_step(adam, net, lg.gradient);
      } else {
        gradient_descent_step(net, lg.gradient, config.learning_rate);
      }
    } else {
      SeededRng order_rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
      const auto order = order_rng.permutation(n);
      for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t count = std::min(batch, n - start);
        if (xb.rows() != count) {
          xb = Matrix(count, train.input_dim());
          yb = Matrix(count, train.target_dim());
        }
        for (std::size_t i = 0; i < count; ++i) {
          std::ranges::copy(train.inputs.row(order[start + i]), xb.row(i).begin());
          std::ranges::copy(train.targets.row(order[start + i]), yb.row(i).begin());
        }
        const auto lg = backward_mse(net, xb, yb, config.reduction);
        if (config.optimizer == OptimizerKind::kAdam) {
          adam_step(adam, net, lg.gradient);
        } else {
          gradient_descent_step(net, lg.gradient, config.learning_rate);
        }
      }
    }
    result.epochs_run = epoch;

    const bool record_due = epoch % config.recording_interval == 0 || epoch == config.epochs;
    double loss = -1.0;
    if (config.stop_at_loss > 0.0) {
      loss = mse_loss(net, train.inputs, train.targets, config.reduction);
      result.stopped_early = loss <= config.stop_at_loss;
    }
    if (record_due || result.stopped_early) {
      if (loss < 0.0) loss = mse_loss(net, train.inputs, train.targets, config.reduction);
      TraceRecord record;
      record.epoch = epoch;
      record.train_loss = loss;
      const TrainSnapshot snapshot{net, epoch, loss};
      for (const auto& observe : observers) observe(snapshot, record);
      result.trace.records.push_back(std::move(record));
    }
    if (result.stopped_early) break;
  }
  result.net = std::move(net);
  return result;
}

}  // namespace fplab
