#include <gtest/gtest.h>

#include <cmath>

#include "fplab/datasets.hpp"
#include "fplab/error.hpp"
#include "fplab/optimizer.hpp"

namespace fplab {
namespace {

NetworkParams scalar_net(double w) {
  NetworkParams net = make_network(std::vector<std::size_t>{1, 1});
  net.layers[0].weights(0, 0) = w;
  return net;
}

TEST(Adam, ZeroGradientLeavesParameters) {
  auto net = init_network(std::vector<std::size_t>{2, 3, 1}, InitSpec{0.5, 0.5, 0.0, 1});
  const auto before = net;
  AdamState state(net, AdamConfig{});
  adam_step(state, net, zeros_like(net));
  EXPECT_EQ(net, before);
  EXPECT_EQ(state.step_count(), 1);
  adam_step(state, net, zeros_like(net));
  EXPECT_EQ(state.step_count(), 2);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto net = init_network(std::vector<std::size_t>{2, 3, 1}, InitSpec{0.5, 0.5, 0.0, 1});
  const auto before = net;
  NetworkParams g = zeros_like(net);
  for (auto block : g.blocks()) std::fill(block.begin(), block.end(), 1.0);
  AdamState state(net, AdamConfig{0.01});
  adam_step(state, net, g);
  const auto nb = net.blocks();
  const auto bb = before.blocks();
  for (std::size_t b = 0; b < nb.size(); ++b) {
    for (std::size_t i = 0; i < nb[b].size(); ++i) EXPECT_NEAR(bb[b][i] - nb[b][i], 0.01, 0.01 * 1e-6);
  }
}

TEST(Adam, FirstStepIsScaleInvariant) {
  for (double scale : {1e-6, 1e-2, 1.0, 1e4}) {
    auto net = init_network(std::vector<std::size_t>{1, 4, 1}, InitSpec{0.5, 0.5, 0.0, 2});
    const auto before = net;
    NetworkParams g = zeros_like(net);
    double sign = 1.0;
    for (auto block : g.blocks()) {
      for (double& v : block) {
        v = sign * scale * (1.0 + 0.37 * std::abs(sign));
        sign = -sign;
      }
    }
    AdamState state(net, AdamConfig{0.05});
    adam_step(state, net, g);
    const auto nb = net.blocks();
    const auto bb = before.blocks();
    for (std::size_t b = 0; b < nb.size(); ++b) {
      for (std::size_t i = 0; i < nb[b].size(); ++i) EXPECT_LE(std::abs(nb[b][i] - bb[b][i]), 0.05 * (1 + 1e-9));
    }
  }
}

TEST(Adam, HandComputedSecondStep) {
  // Two steps on a single parameter with gradients 2 then -1.
  auto net = scalar_net(1.0);
  AdamState state(net, AdamConfig{0.1, 0.9, 0.999, 1e-8});
  NetworkParams g = zeros_like(net);
  g.layers[0].weights(0, 0) = 2.0;
  adam_step(state, net, g);
  g.layers[0].weights(0, 0) = -1.0;
  adam_step(state, net, g);
  double m = 0.0, v = 0.0, w = 1.0;
  const double grads[2] = {2.0, -1.0};
  for (int t = 1; t <= 2; ++t) {
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(net.layers[0].weights(0, 0), w, 1e-14);
  EXPECT_GE(state.second_moment().layers[0].weights(0, 0), 0.0);
}

TEST(Adam, ConvergesOnScalarQuadratic) {
  auto net = scalar_net(0.0);
  AdamState state(net, AdamConfig{0.1});
  NetworkParams g = zeros_like(net);
  for (int i = 0; i < 200; ++i) {
    g.layers[0].weights(0, 0) = net.layers[0].weights(0, 0) - 3.0;
    adam_step(state, net, g);
  }
  EXPECT_LT(std::abs(net.layers[0].weights(0, 0) - 3.0), 0.05);
}

TEST(Adam, ShapeMismatchThrows) {
  auto net = init_network(std::vector<std::size_t>{1, 3, 1}, InitSpec{});
  AdamState state(net, AdamConfig{});
  const auto other = make_network(std::vector<std::size_t>{1, 4, 1});
  EXPECT_THROW(adam_step(state, net, other), InvalidArgument);
}

TEST(GradientDescent, Step) {
  auto net = scalar_net(1.0);
  NetworkParams g = zeros_like(net);
  g.layers[0].weights(0, 0) = 4.0;
  gradient_descent_step(net, g, 0.25);
  EXPECT_DOUBLE_EQ(net.layers[0].weights(0, 0), 0.0);
}

TEST(TrainLoop, ZeroEpochsReturnsInitialNetwork) {
  const auto data = make_1d_target(TargetKind::kLinear, 10, -1, 1);
  const auto net = init_network(std::vector<std::size_t>{1, 5, 1}, InitSpec{0.1, 0.1, 0.0, 1});
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto r = train_loop(net, data, cfg);
  EXPECT_EQ(r.net, net);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.epochs_run, 0);
}

TEST(TrainLoop, EmptyDatasetThrows) {
  Dataset empty;
  empty.inputs = Matrix(0, 1);
  empty.targets = Matrix(0, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train_loop(make_network(std::vector<std::size_t>{1, 1}), empty, cfg), InvalidArgument);
}

TEST(TrainLoop, ZeroLearningRateNeverMoves) {
  const auto data = make_1d_target(TargetKind::kLinear, 12, -1, 1);
  const auto net = init_network(std::vector<std::size_t>{1, 6, 1}, InitSpec{0.3, 0.3, 0.0, 4});
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.0;
  EXPECT_EQ(train_loop(net, data, cfg).net, net);
  cfg.optimizer = OptimizerKind::kGradientDescent;
  EXPECT_EQ(train_loop(net, data, cfg).net, net);
}

TEST(TrainLoop, FitsLinearTarget) {
  const auto data = make_1d_target(TargetKind::kLinear, 40, -1, 1);
  const auto net = init_network(std::vector<std::size_t>{1, 50, 1}, InitSpec{0.1, 0.1, 0.0, 7});
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.learning_rate = 1e-3;
  cfg.recording_interval = 500;
  const auto r = train_loop(net, data, cfg);
  EXPECT_LT(r.trace.records.back().train_loss, 1e-3);
  EXPECT_EQ(r.trace.records.back().epoch, 2000);
}

TEST(TrainLoop, RecordsAtIntervalAndFinalEpoch) {
  const auto data = make_1d_target(TargetKind::kLinear, 8, -1, 1);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.recording_interval = 4;
  const auto r = train_loop(init_network(std::vector<std::size_t>{1, 3, 1}, InitSpec{}), data, cfg);
  EXPECT_EQ(r.trace.epochs(), (std::vector<long>{4, 8, 10}));
}

TEST(TrainLoop, SameSeedSameTrace) {
  const auto data = make_1d_target(TargetKind::kLowFrequency, 30, -3, 3);
  const auto net = init_network(std::vector<std::size_t>{1, 8, 1}, InitSpec{0.5, 0.5, 0.0, 2});
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 7;
  cfg.seed = 99;
  const Observer stats = [](const TrainSnapshot& s, TraceRecord& r) { r.stats = param_stats(s.net); };
  const std::vector<Observer> obs{stats};
  const auto a = train_loop(net, data, cfg, obs);
  const auto b = train_loop(net, data, cfg, obs);
  EXPECT_EQ(a.net, b.net);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace.records[i].train_loss, b.trace.records[i].train_loss);
    EXPECT_EQ(a.trace.records[i].stats->mean_abs_weight, b.trace.records[i].stats->mean_abs_weight);
  }
  cfg.seed = 100;
  EXPECT_FALSE(train_loop(net, data, cfg).net == a.net);
}

TEST(TrainLoop, ObserversSeeSnapshotBeforeNextUpdate) {
  const auto data = make_1d_target(TargetKind::kLinear, 10, -1, 1);
  const auto net = init_network(std::vector<std::size_t>{1, 4, 1}, InitSpec{0.2, 0.2, 0.0, 3});
  TrainConfig cfg;
  cfg.epochs = 3;
  std::vector<NetworkParams> seen;
  const Observer grab = [&](const TrainSnapshot& s, TraceRecord&) { seen.push_back(s.net); };
  const std::vector<Observer> obs{grab};
  const auto r = train_loop(net, data, cfg, obs);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen.back(), r.net);
  // Re-running two epochs reproduces the second snapshot.
  cfg.epochs = 2;
  EXPECT_EQ(train_loop(net, data, cfg).net, seen[1]);
}

TEST(TrainLoop, StopsAtLossThreshold) {
  const auto data = make_1d_target(TargetKind::kLinear, 20, -1, 1);
  const auto net = init_network(std::vector<std::size_t>{1, 20, 1}, InitSpec{0.1, 0.1, 0.0, 5});
  TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.learning_rate = 1e-2;
  cfg.stop_at_loss = 1e-2;
  const auto r = train_loop(net, data, cfg);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_LT(r.epochs_run, 5000);
  EXPECT_LE(r.trace.records.back().train_loss, 1e-2);
}

}  // namespace
}  // namespace fplab
