#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "fplab/dataset.hpp"
#include "fplab/network.hpp"
#include "fplab/trace.hpp"

namespace fplab {

// Standard Adam defaults.
struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moments and step counter for one network.
class AdamState {
 public:
  AdamState(const NetworkParams& like, AdamConfig config);

  const AdamConfig& config() const noexcept { return config_; }
  long step_count() const noexcept { return step_count_; }
  const NetworkParams& first_moment() const noexcept { return m_; }
  const NetworkParams& second_moment() const noexcept { return v_; }

 private:
  friend void adam_step(AdamState&, NetworkParams&, const NetworkParams&);

  AdamConfig config_;
  long step_count_ = 0;
  NetworkParams m_;
  NetworkParams v_;
};

/// One bias-corrected Adam update of `net` in place. Throws InvalidArgument
/// if `grads` or the state are not shaped like `net`.
void adam_step(AdamState& state, NetworkParams& net, const NetworkParams& grads);

/// net -= learning_rate * grads
void gradient_descent_step(NetworkParams& net, const NetworkParams& grads, double learning_rate);

enum class OptimizerKind { kAdam, kGradientDescent };

struct TrainConfig {
  std::size_t batch_size = 0;  // 0 = full batch
  long epochs = 0;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;   // mini-batch shuffling
  long recording_interval = 1;
  Reduction reduction = Reduction::kMean;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  // Stop after the first epoch whose full training loss is <= this value; 0 disables.
  double stop_at_loss = 0.0;
};

/// Read-only view handed to observers at a recording step.
struct TrainSnapshot {
  const NetworkParams& net;
  long epoch;
  double train_loss;  // full training set, reduced per TrainConfig::reduction
};

/// Observers fill in the fields of the record they are responsible for.
using Observer = std::function<void(const TrainSnapshot&, TraceRecord&)>;

struct TrainResult {
  NetworkParams net;
  TrainTrace trace;
  long epochs_run = 0;
  bool stopped_early = false;
};

/// Mini-batch training. Each epoch visits every sample once in an order drawn
/// from a stream seeded by (seed, epoch); full-batch runs keep dataset order.
/// A record is taken after every recording_interval-th epoch and after the
/// final epoch; observers run in order, all before the next update.
TrainResult train_loop(NetworkParams net, const Dataset& train, const TrainConfig& config,
                       std::span<const Observer> observers = {});

}  // namespace fplab
