#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fplab/config.hpp"
#include "fplab/error.hpp"
#include "fplab/experiment.hpp"

namespace fplab {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fplab-experiment-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Trace with one Delta_F series per peak: 1.0 until `cross`, 0.1 afterwards.
TrainTrace synthetic_trace(const std::map<std::size_t, long>& cross, long epochs) {
  TrainTrace t;
  for (long e = 0; e <= epochs; e += 10) {
    TraceRecord r;
    r.epoch = e;
    for (auto [peak, at] : cross) r.delta_f[peak] = (at >= 0 && e >= at) ? 0.1 : 1.0;
    t.records.push_back(r);
  }
  return t;
}

ExperimentConfig small_fit_config() {
  auto c = default_config(ExperimentKind::kFit1d);
  c.layer_dims = {1, 16, 1};
  c.dataset.count = 32;
  c.optimizer.epochs = 30;
  c.optimizer.learning_rate = 1e-2;
  c.recording_interval = 10;
  return c;
}

// ---------------------------------------------------------------------------
// Convergence order

TEST(ConvergenceOrder, AllAboveThresholdIsVacuouslyInOrder) {
  const auto o = convergence_order(synthetic_trace({{1, -1}, {3, -1}, {5, -1}}, 200));
  EXPECT_TRUE(o.in_order);
  for (const auto& p : o.peaks) EXPECT_FALSE(p.epoch);
}

TEST(ConvergenceOrder, LowToHigh) {
  const auto o = convergence_order(synthetic_trace({{1, 10}, {2, 50}, {3, 200}}, 400));
  EXPECT_TRUE(o.in_order);
  EXPECT_EQ(*o.peaks[0].epoch, 10);
  EXPECT_EQ(*o.peaks[1].epoch, 50);
  EXPECT_EQ(*o.peaks[2].epoch, 200);
  EXPECT_FALSE(o.violation);
}

TEST(ConvergenceOrder, ViolationReportsPair) {
  const auto o = convergence_order(synthetic_trace({{1, 100}, {2, 30}, {3, 200}}, 400));
  EXPECT_FALSE(o.in_order);
  ASSERT_TRUE(o.violation);
  EXPECT_EQ(o.violation->first, 1u);
  EXPECT_EQ(o.violation->second, 2u);
}

TEST(ConvergenceOrder, NeverConvergedSortsLast) {
  EXPECT_TRUE(convergence_order(synthetic_trace({{1, 10}, {2, -1}}, 100)).in_order);
  EXPECT_FALSE(convergence_order(synthetic_trace({{1, -1}, {2, 10}}, 100)).in_order);
}

TEST(ConvergenceOrder, SustainRequiresConsecutiveRecords) {
  auto t = synthetic_trace({{1, 100}}, 300);
  t.records[3].delta_f[1] = 0.1;  // epoch 30: a single dip
  EXPECT_EQ(*convergence_order(t, 0.3, 5).peaks[0].epoch, 100);
  EXPECT_EQ(*convergence_order(t, 0.3, 1).peaks[0].epoch, 30);
}

TEST(ConvergenceOrder, MaxPeaksRestrictsToLowest) {
  const auto t = synthetic_trace({{1, 10}, {2, 20}, {3, 30}, {4, 5}}, 100);
  EXPECT_FALSE(convergence_order(t).in_order);
  EXPECT_TRUE(convergence_order(t, 0.3, 5, 3).in_order);
  EXPECT_EQ(convergence_order(t, 0.3, 5, 3).peaks.size(), 3u);
}

// ---------------------------------------------------------------------------
// Extra-high-frequency energy

TEST(ExtraHighFreqEnergy, ZeroNetworkIsZero) {
  const auto net = make_network(std::vector<std::size_t>{1, 4, 1});
  EXPECT_EQ(extra_high_freq_energy(net, Grid1d{-1.0, 0.1, 21}, 4), 0.0);
}

TEST(ExtraHighFreqEnergy, BandLimitedSinusoid) {
  const std::size_t train = 32, factor = 8, n = train * factor;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2 * kPi * 5 * i / n) + 0.3 * std::cos(2 * kPi * 11 * i / n);
  EXPECT_LT(extra_high_freq_energy(s, train), 1e-6);
}

TEST(ExtraHighFreqEnergy, SuperNyquistContent) {
  const std::size_t train = 32, factor = 8, n = train * factor;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2 * kPi * 5 * i / n) + std::sin(2 * kPi * 40 * i / n);
  EXPECT_NEAR(extra_high_freq_energy(s, train), 0.5, 1e-9);
}

TEST(ExtraHighFreqEnergy, Preconditions) {
  const auto net = init_network(std::vector<std::size_t>{1, 4, 1}, InitSpec{});
  EXPECT_THROW(extra_high_freq_energy(net, Grid1d{0, 0.1, 10}, 1), InvalidArgument);
  const auto wide = init_network(std::vector<std::size_t>{2, 4, 1}, InitSpec{});
  EXPECT_THROW(extra_high_freq_energy(wide, Grid1d{0, 0.1, 10}, 4), InvalidArgument);
}

TEST(Accuracy, ArgmaxAgreement) {
  Matrix out(3, 3, std::vector<double>{0.9, 0.1, 0, 0, 0.2, 0.8, 0.5, 0.4, 0.1});
  Matrix tgt(3, 3, std::vector<double>{1, 0, 0, 0, 1, 0, 1, 0, 0});
  EXPECT_NEAR(accuracy(out, tgt), 2.0 / 3, 1e-15);
}

// ---------------------------------------------------------------------------
// Configuration

TEST(Config, DefaultsValidate) {
  for (auto kind : {ExperimentKind::kFit1d, ExperimentKind::kFlip}) EXPECT_NO_THROW(validate(default_config(kind)));
  auto image = default_config(ExperimentKind::kFitImage);
  image.dataset.image = "x.pgm";
  EXPECT_NO_THROW(validate(image));
}

TEST(Config, ClassificationPeakTrackingRejected) {
  auto c = default_config(ExperimentKind::kFitMnist);
  c.dataset.train_images = "a";
  c.dataset.train_labels = "b";
  EXPECT_NO_THROW(validate(c));
  c.peaks.track = true;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, ArchitectureMismatch) {
  auto c = default_config(ExperimentKind::kFit1d);
  c.layer_dims = {2, 10, 1};
  EXPECT_THROW(validate(c), ConfigError);
  c.layer_dims = {1, 10, 2};
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, JsonRoundTripIsLossless) {
  auto c = default_config(ExperimentKind::kFlip);
  c.seed = 123456789012345ULL;
  c.weight_std = 0.1 + 1e-17;
  c.optimizer.learning_rate = 3.3e-5;
  c.optimizer.batch_size = 7;
  c.optimizer.reduction = Reduction::kSum;
  c.peaks.indices = {1, 2, 19};
  c.convergence = {0.25, 3};
  c.output_dir = "somewhere";
  c.dataset.target = "custom";
  c.dataset.samples = {0.1, -0.2, 0.30000000000000004};
  c.dataset.count = 3;
  const std::string text = config_to_json(c);
  const auto back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.weight_std, c.weight_std);
  EXPECT_EQ(back.dataset.samples, c.dataset.samples);
  EXPECT_EQ(config_to_json(back, -1).find('\n'), std::string::npos);
}

TEST(Config, MissingKeysTakeFamilyDefaults) {
  const auto c = config_from_json(R"({"experiment": "flip-experiment", "seed": 9})");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.layer_dims, default_config(ExperimentKind::kFlip).layer_dims);
  EXPECT_EQ(c.dataset.count, 40u);
}

TEST(Config, UnknownKeyRejectedByName) {
  try {
    config_from_json(R"({"experiment": "fit-1d", "optimizer": {"learning_rat": 0.1}})");
    FAIL() << "typo accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("optimizer.learning_rat"), std::string::npos);
  }
}

TEST(Config, WrongTypeAndFamily) {
  EXPECT_THROW(config_from_json(R"({"experiment": "fit-1d", "seed": "one"})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"experiment": "fit-1d"})", ExperimentKind::kFlip), ConfigError);
  EXPECT_THROW(config_from_json(R"({"experiment": "fit-3d"})"), ConfigError);
  EXPECT_THROW(config_from_json("{not json"), ConfigError);
  EXPECT_NO_THROW(config_from_json("{}", ExperimentKind::kFit1d));
}

TEST(Config, TheoremConfigsRoundTrip) {
  DominanceConfig d;
  d.scenario.theta1 = 0.3;
  d.deltas = {0.4, 0.1};
  d.options.samples_per_delta = 77;
  const auto dj = config_to_json(d);
  EXPECT_EQ(config_to_json(dominance_config_from_json(dj)), dj);

  CrossingConfig c;
  c.scenario.k2 = 3.5;
  c.grid_points = 5;
  c.options.constants = CrossingConstants::kHalfDecay;
  const auto cj = config_to_json(c);
  EXPECT_EQ(config_to_json(crossing_config_from_json(cj)), cj);
  EXPECT_EQ(c.resolved_grid(), (std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125}));
  EXPECT_THROW(crossing_config_from_json(R"({"scenario": {"k1": 2, "k2": 1}})"), ConfigError);
  EXPECT_THROW(dominance_config_from_json(R"({"scenario": {"kk": 1}})"), ConfigError);
}

TEST(Config, MissingFileNamesPath) {
  try {
    read_config_text("/nonexistent/cfg.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/cfg.json"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// Running

TEST(RunExperiment, ZeroEpochsGivesInitialRecordOnly) {
  auto c = small_fit_config();
  c.optimizer.epochs = 0;
  const auto r = run_experiment(c);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace.records[0].epoch, 0);
  EXPECT_EQ(r.net, init_network(c.layer_dims, c.init_spec()));
  EXPECT_FALSE(r.trace.records[0].delta_f.empty());
}

TEST(RunExperiment, RecordsEveryObservedQuantity) {
  const auto c = small_fit_config();
  const auto r = run_experiment(c);
  EXPECT_EQ(r.trace.epochs(), (std::vector<long>{0, 10, 20, 30}));
  EXPECT_EQ(r.peaks.indices(), (std::vector<std::size_t>{3, 10, 16}));
  for (const auto& rec : r.trace.records) {
    ASSERT_TRUE(rec.stats);
    EXPECT_EQ(rec.spectral_norms.size(), 2u);
    EXPECT_EQ(rec.delta_f.size(), 3u);
    EXPECT_GE(rec.train_loss, 0.0);
  }
  ASSERT_TRUE(r.order);
}

TEST(RunExperiment, ExtraObserversRunOnEveryRecord) {
  const auto c = small_fit_config();
  std::vector<long> seen;
  const Observer obs = [&](const TrainSnapshot& s, TraceRecord&) { seen.push_back(s.epoch); };
  run_experiment(c, std::vector<Observer>{obs});
  EXPECT_EQ(seen, (std::vector<long>{0, 10, 20, 30}));
}

TEST(RunExperiment, ExplicitPeakIndices) {
  auto c = small_fit_config();
  c.peaks.indices = {1, 2};
  const auto r = run_experiment(c);
  EXPECT_EQ(r.peaks.indices(), (std::vector<std::size_t>{1, 2}));
  c.peaks.indices = {40};
  EXPECT_THROW(run_experiment(c), ConfigError);
}

TEST(RunExperiment, SameSeedWritesIdenticalFiles) {
  auto c = small_fit_config();
  c.checkpoint_interval = 20;
  c.output_dir = scratch_dir("same").string();
  const auto a = run_experiment(c);
  ASSERT_GE(a.written.size(), 4u);
  std::vector<std::string> first;
  for (const auto& p : a.written) first.push_back(slurp(p));
  fs::remove_all(c.output_dir);
  const auto b = run_experiment(c);
  ASSERT_EQ(b.written, a.written);
  for (std::size_t i = 0; i < a.written.size(); ++i) EXPECT_EQ(slurp(b.written[i]), first[i]) << a.written[i];
}

TEST(RunExperiment, TraceCsvIsReadable) {
  auto c = small_fit_config();
  c.output_dir = scratch_dir("readable").string();
  const auto r = run_experiment(c);
  const auto table = read_csv_file(fs::path(c.output_dir) / "trace.csv");
  ASSERT_FALSE(table.comments.empty());
  EXPECT_EQ(table.comments[0].rfind("config {", 0), 0u);
  const auto back = trace_from_table(table);
  ASSERT_EQ(back.size(), r.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.records[i].train_loss, r.trace.records[i].train_loss);
    EXPECT_EQ(back.records[i].delta_f, r.trace.records[i].delta_f);
    EXPECT_EQ(back.records[i].spectral_norms, r.trace.records[i].spectral_norms);
  }
  // The config comment parses back into the config that produced the run.
  const auto echoed = config_from_json(table.comments[0].substr(std::string("config ").size()));
  EXPECT_EQ(config_to_json(echoed), config_to_json(c));
}

TEST(RunExperiment, FlippedTargetPeaks) {
  auto c = default_config(ExperimentKind::kFlip);
  c.optimizer.epochs = 0;
  const auto data = prepare_data(c);
  ASSERT_TRUE(data.target_spectrum);
  const auto peaks = select_peaks(*data.target_spectrum, c.peaks.max_peaks, c.peaks.rel_threshold);
  EXPECT_EQ(peaks.indices().back(), 19u);
}

TEST(RunExperiment, ImageRowFromFixture) {
  auto c = default_config(ExperimentKind::kFitImage);
  c.dataset.image = (fs::path(FPLAB_TEST_DATA_DIR) / "camera64-row.pgm").string();
  c.dataset.row = 0;
  c.dataset.row_only = true;
  c.layer_dims = {1, 8, 1};
  c.optimizer.epochs = 0;
  const auto data = prepare_data(c);
  EXPECT_EQ(data.train.size(), 32u);
  EXPECT_EQ(data.test.size(), 32u);
  ASSERT_TRUE(data.train.grid);
  const auto r = run_experiment(c, data);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.trace.records[0].test_loss);
}

TEST(RunExperiment, MissingImageIsIoError) {
  auto c = default_config(ExperimentKind::kFitImage);
  c.dataset.image = "/nonexistent/image.pgm";
  EXPECT_THROW(prepare_data(c), IoError);
}

TEST(RunExperiment, MnistRecordsAccuracy) {
  auto c = default_config(ExperimentKind::kFitMnist);
  const fs::path d = FPLAB_TEST_DATA_DIR;
  c.dataset.train_images = (d / "mnist-train-images.idx3-ubyte").string();
  c.dataset.train_labels = (d / "mnist-train-labels.idx1-ubyte").string();
  c.dataset.test_images = (d / "mnist-test-images.idx3-ubyte").string();
  c.dataset.test_labels = (d / "mnist-test-labels.idx1-ubyte").string();
  c.dataset.train_limit = 200;
  c.dataset.test_limit = 100;
  c.layer_dims = {784, 16, 10};
  c.optimizer.epochs = 2;
  const auto r = run_experiment(c);
  for (const auto& rec : r.trace.records) {
    ASSERT_TRUE(rec.train_accuracy && rec.test_accuracy);
    EXPECT_GE(*rec.test_accuracy, 0.0);
    EXPECT_LE(*rec.test_accuracy, 1.0);
    EXPECT_TRUE(rec.delta_f.empty());
  }
  EXPECT_FALSE(r.order);
}

}  // namespace
}  // namespace fplab
