#include "fplab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "fplab/checkpoint.hpp"
#include "fplab/config.hpp"
#include "fplab/datasets.hpp"
#include "fplab/error.hpp"

namespace fplab {

namespace {

constexpr std::size_t kMnistPixels = 784;
constexpr std::size_t kMnistClasses = 10;

bool is_regression(ExperimentKind kind) { return kind != ExperimentKind::kFitMnist; }

Dataset make_base_target(const DatasetRecipe& r) {
  if (r.target == "lowfreq") return make_1d_target(TargetKind::kLowFrequency, r.count, r.lo, r.hi);
  if (r.target == "linear") return make_1d_target(TargetKind::kLinear, r.count, r.lo, r.hi);
  if (r.target == "custom") return make_1d_target(r.samples, r.lo, r.hi);
  throw ConfigError("dataset.target must be lowfreq, linear or custom, got '" + r.target + "'");
}

std::vector<double> column0(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, 0);
  return out;
}

}  // namespace

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kFit1d:
      return "fit-1d";
    case ExperimentKind::kFitImage:
      return "fit-image";
    case ExperimentKind::kFitMnist:
      return "fit-mnist";
    case ExperimentKind::kFlip:
      return "flip-experiment";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kFit1d, ExperimentKind::kFitImage, ExperimentKind::kFitMnist, ExperimentKind::kFlip}) {
    if (name == experiment_name(k)) return k;
  }
  return std::nullopt;
}

InitSpec ExperimentConfig::init_spec() const { return InitSpec{weight_std, bias_std, init_mean, seed}; }

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kFit1d:
      c.layer_dims = {1, 200, 200, 100, 1};
      c.optimizer.learning_rate = 5e-4;
      c.optimizer.epochs = 3000;
      c.recording_interval = 20;
      break;
    case ExperimentKind::kFlip:
      c.dataset.target = "linear";
      c.dataset.count = 40;
      c.dataset.lo = -1.0;
      c.dataset.hi = 1.0;
      c.layer_dims = {1, 200, 200, 200, 200, 100, 1};
      c.optimizer.learning_rate = 5e-4;
      c.optimizer.epochs = 5000;
      c.recording_interval = 20;
      break;
    case ExperimentKind::kFitImage:
      c.layer_dims = {2, 500, 400, 300, 200, 200, 100, 100, 1};
      c.weight_std = 0.08;
      c.bias_std = 0.08;
      c.optimizer.learning_rate = 2e-5;
      c.optimizer.epochs = 5000;
      c.recording_interval = 10;
      c.dataset.row = 40;
      break;
    case ExperimentKind::kFitMnist:
      c.layer_dims = {784, 400, 200, 100, 10};
      c.weight_std = 0.01;
      c.bias_std = 0.01;
      c.optimizer.learning_rate = 1e-3;
      c.optimizer.batch_size = 400;
      c.optimizer.epochs = 50;
      c.peaks.track = false;
      break;
  }
  return c;
}

std::size_t expected_input_dim(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kFit1d:
    case ExperimentKind::kFlip:
      return 1;
    case ExperimentKind::kFitImage:
      return config.dataset.row_only ? 1 : 2;
    case ExperimentKind::kFitMnist:
      return kMnistPixels;
  }
  return 0;
}

void validate(const ExperimentConfig& c) {
  if (c.layer_dims.size() < 2) throw ConfigError("layer_dims needs at least an input and an output width");
  for (std::size_t d : c.layer_dims) {
    if (d == 0) throw ConfigError("layer_dims entries must be positive");
  }
  if (c.layer_dims.front() != expected_input_dim(c)) {
    throw ConfigError(std::string(experiment_name(c.kind)) + " needs input width " +
                      std::to_string(expected_input_dim(c)) + ", layer_dims starts with " +
                      std::to_string(c.layer_dims.front()));
  }
  const std::size_t out = is_regression(c.kind) ? 1 : kMnistClasses;
  if (c.layer_dims.back() != out) {
    throw ConfigError(std::string(experiment_name(c.kind)) + " needs output width " + std::to_string(out));
  }
  if (!(c.weight_std >= 0.0) || !(c.bias_std >= 0.0)) throw ConfigError("init standard deviations must be >= 0");
  if (!(c.optimizer.learning_rate > 0.0)) throw ConfigError("optimizer.learning_rate must be > 0");
  if (c.optimizer.epochs < 0) throw ConfigError("optimizer.epochs must be >= 0");
  if (c.recording_interval < 1) throw ConfigError("recording_interval must be >= 1");
  if (c.checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
  if (c.power_iterations < 1) throw ConfigError("power_iterations must be >= 1");
  if (c.convergence.sustain < 1) throw ConfigError("convergence.sustain must be >= 1");
  if (!is_regression(c.kind) && c.peaks.track) {
    throw ConfigError("peak tracking was requested for a classification run (fit-mnist has no target spectrum)");
  }
  if (c.peaks.track && !(c.peaks.rel_threshold >= 0.0 && c.peaks.rel_threshold <= 1.0)) {
    throw ConfigError("peaks.rel_threshold must lie in [0, 1]");
  }
  switch (c.kind) {
    case ExperimentKind::kFit1d:
    case ExperimentKind::kFlip:
      if (c.dataset.target == "custom" ? c.dataset.samples.size() < 2 : c.dataset.count < 2) {
        throw ConfigError("dataset needs at least 2 samples");
      }
      if (!(c.dataset.lo < c.dataset.hi)) throw ConfigError("dataset.lo must be < dataset.hi");
      break;
    case ExperimentKind::kFitImage:
      if (c.dataset.image.empty()) throw ConfigError("fit-image needs dataset.image");
      break;
    case ExperimentKind::kFitMnist:
      if (c.dataset.train_images.empty() || c.dataset.train_labels.empty()) {
        throw ConfigError("fit-mnist needs dataset.train_images and dataset.train_labels");
      }
      if (c.dataset.test_images.empty() != c.dataset.test_labels.empty()) {
        throw ConfigError("fit-mnist needs both dataset.test_images and dataset.test_labels, or neither");
      }
      break;
  }
}

ConvergenceOrder convergence_order(const TrainTrace& trace, double threshold, std::size_t sustain,
                                   std::size_t max_peaks) {
  ConvergenceOrder order;
  auto peaks = trace.peaks();
  if (max_peaks > 0 && peaks.size() > max_peaks) peaks.resize(max_peaks);
  const std::size_t run = std::max<std::size_t>(sustain, 1);
  for (std::size_t peak : peaks) {
    const auto series = trace.delta_f_series(peak);
    PeakConvergence pc{peak, std::nullopt};
    std::size_t streak = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
      streak = series[i] < threshold ? streak + 1 : 0;  // NaN breaks a streak
      if (streak == run) {
        pc.epoch = trace.records[i + 1 - run].epoch;
        break;
      }
    }
    order.peaks.push_back(pc);
  }
  constexpr long kNever = std::numeric_limits<long>::max();
  for (std::size_t i = 1; i < order.peaks.size(); ++i) {
    const long lower = order.peaks[i - 1].epoch.value_or(kNever);
    const long higher = order.peaks[i].epoch.value_or(kNever);
    if (higher < lower) {
      order.in_order = false;
      order.violation = std::pair{order.peaks[i - 1].peak, order.peaks[i].peak};
      break;
    }
  }
  return order;
}

double extra_high_freq_energy(std::span<const double> dense_samples, std::size_t train_count) {
  if (train_count == 0 || dense_samples.size() < train_count) {
    throw InvalidArgument("extra_high_freq_energy: dense grid is smaller than the training grid");
  }
  const Spectrum s = dft(dense_samples);
  const std::size_t half = s.size() / 2;
  const std::size_t nyquist = train_count / 2;
  double total = 0.0, extra = 0.0;
  for (std::size_t k = 1; k <= half; ++k) {
    const double e = std::norm(s.coefficients[k]);
    total += e;
    if (k > nyquist) extra += e;
  }
  return total == 0.0 ? 0.0 : extra / total;
}

double extra_high_freq_energy(const NetworkParams& net, const Grid1d& train_grid, std::size_t dense_factor) {
  if (dense_factor < 2) throw InvalidArgument("extra_high_freq_energy: dense_factor must be >= 2");
  if (net.input_dim() != 1) throw InvalidArgument("extra_high_freq_energy: network input must be 1-d");
  const std::size_t n = train_grid.count * dense_factor;
  const double spacing = train_grid.spacing / static_cast<double>(dense_factor);
  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) x(i, 0) = train_grid.origin + static_cast<double>(i) * spacing;
  const Matrix y = forward_batch(net, x);
  return extra_high_freq_energy(column0(y), train_grid.count);
}

double accuracy(const Matrix& outputs, const Matrix& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw InvalidArgument("accuracy: outputs and targets differ in shape");
  }
  if (outputs.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.rows(); ++i) {
    const auto o = outputs.row(i);
    const auto t = targets.row(i);
    hits += std::ranges::max_element(o) - o.begin() == std::ranges::max_element(t) - t.begin();
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.rows());
}

ExperimentData prepare_data(const ExperimentConfig& config) {
  validate(config);
  const DatasetRecipe& r = config.dataset;
  ExperimentData data;
  switch (config.kind) {
    case ExperimentKind::kFit1d:
    case ExperimentKind::kFlip: {
      Dataset d = make_base_target(r);
      if (config.kind == ExperimentKind::kFlip) d = make_flipped_target(d);
      data.analysis_inputs = d.inputs;
      data.target_spectrum = dft(column0(d.targets), d.grid->spacing, d.grid->origin);
      data.train = std::move(d);
      break;
    }
    case ExperimentKind::kFitImage: {
      const ImageData img = load_pgm(r.image);
      if (r.row >= img.image.rows) {
        throw ConfigError("dataset.row " + std::to_string(r.row) + " is outside the " +
                          std::to_string(img.image.rows) + "-row image");
      }
      const Dataset row = image_row_dataset(img.image, r.row, img.dataset.provenance + " row=" + std::to_string(r.row));
      auto [train, test] = split_odd_columns(r.row_only ? row : img.dataset);
      data.train = std::move(train);
      data.test = std::move(test);
      if (r.row_only) {
        data.analysis_inputs = row.inputs;
      } else {
        Matrix xy(row.size(), 2);
        const double y = img.image.rows <= 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(r.row) / (img.image.rows - 1.0);
        for (std::size_t c = 0; c < row.size(); ++c) {
          xy(c, 0) = row.inputs(c, 0);
          xy(c, 1) = y;
        }
        data.analysis_inputs = std::move(xy);
      }
      const double spacing = row.grid ? row.grid->spacing : 1.0;
      data.target_spectrum = dft(column0(row.targets), spacing, row.inputs(0, 0));
      break;
    }
    case ExperimentKind::kFitMnist: {
      data.train = load_mnist(r.train_images, r.train_labels, r.train_limit);
      if (!r.test_images.empty()) {
        data.test = load_mnist(r.test_images, r.test_labels, r.test_limit);
        data.test.split = Split::kTest;
      }
      if (data.train.input_dim() != config.layer_dims.front()) {
        throw ConfigError("MNIST images have " + std::to_string(data.train.input_dim()) +
                          " pixels but layer_dims starts with " + std::to_string(config.layer_dims.front()));
      }
      break;
    }
  }
  return data;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::span<const Observer> extra_observers) {
  return run_experiment(config, prepare_data(config), extra_observers);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                std::span<const Observer> extra_observers) {
  validate(config);
  ExperimentResult result;
  const std::filesystem::path out_dir = config.output_dir;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  const bool track = config.peaks.track && data.target_spectrum && data.analysis_inputs;
  if (track) {
    if (config.peaks.indices.empty()) {
      result.peaks = select_peaks(*data.target_spectrum, config.peaks.max_peaks, config.peaks.rel_threshold);
    } else {
      for (std::size_t k : config.peaks.indices) {
        if (k >= data.target_spectrum->size()) throw ConfigError("peaks.indices entry " + std::to_string(k) + " out of range");
        result.peaks.peaks.push_back(Peak{k, std::abs(data.target_spectrum->coefficients[k])});
      }
    }
  }

  std::vector<Observer> observers;
  if (!data.test.empty()) {
    observers.push_back([&](const TrainSnapshot& s, TraceRecord& r) {
      r.test_loss = mse_loss(s.net, data.test.inputs, data.test.targets, config.optimizer.reduction);
    });
  }
  if (track) {
    observers.push_back([&](const TrainSnapshot& s, TraceRecord& r) {
      const Matrix y = forward_batch(s.net, *data.analysis_inputs);
      const Spectrum& target = *data.target_spectrum;
      const Spectrum output = dft(column0(y), target.grid_spacing, target.origin);
      const FreqDiff diff = freq_diff(target, output);
      for (const Peak& p : result.peaks.peaks) {
        if (diff.entries[p.index].delta_f) r.delta_f[p.index] = *diff.entries[p.index].delta_f;
      }
    });
  }
  observers.push_back([](const TrainSnapshot& s, TraceRecord& r) { r.stats = param_stats(s.net); });
  if (config.spectral_norms) {
    observers.push_back([&](const TrainSnapshot& s, TraceRecord& r) {
      r.spectral_norms = layer_spectral_norms(s.net, config.power_iterations);
    });
  }
  if (config.kind == ExperimentKind::kFitMnist) {
    observers.push_back([&](const TrainSnapshot& s, TraceRecord& r) {
      r.train_accuracy = accuracy(forward_batch(s.net, data.train.inputs), data.train.targets);
      if (!data.test.empty()) r.test_accuracy = accuracy(forward_batch(s.net, data.test.inputs), data.test.targets);
    });
  }
  if (!out_dir.empty() && config.checkpoint_interval > 0) {
    observers.push_back([&](const TrainSnapshot& s, TraceRecord&) {
      if (s.epoch % config.checkpoint_interval != 0) return;
      const auto path = out_dir / ("checkpoint_" + std::to_string(s.epoch) + ".fplab");
      save_checkpoint(path, s.net);
      result.written.push_back(path);
    });
  }
  observers.insert(observers.end(), extra_observers.begin(), extra_observers.end());

  NetworkParams net = init_network(config.layer_dims, config.init_spec());

  TraceRecord initial;
  initial.epoch = 0;
  initial.train_loss = mse_loss(net, data.train.inputs, data.train.targets, config.optimizer.reduction);
  for (const auto& observe : observers) observe(TrainSnapshot{net, 0, initial.train_loss}, initial);

  TrainConfig tc;
  tc.batch_size = config.optimizer.batch_size;
  tc.epochs = config.optimizer.epochs;
  tc.learning_rate = config.optimizer.learning_rate;
  tc.seed = config.seed;
  tc.recording_interval = config.recording_interval;
  tc.reduction = config.optimizer.reduction;
  tc.optimizer = config.optimizer.kind;
  tc.stop_at_loss = config.optimizer.stop_at_loss;
  if (tc.batch_size >= data.train.size()) tc.batch_size = 0;

  TrainResult trained = train_loop(std::move(net), data.train, tc, observers);

  result.trace.records.reserve(trained.trace.size() + 1);
  result.trace.records.push_back(std::move(initial));
  for (auto& r : trained.trace.records) result.trace.records.push_back(std::move(r));
  result.net = std::move(trained.net);
  result.epochs_run = trained.epochs_run;
  result.stopped_early = trained.stopped_early;
  if (track && result.peaks.peaks.size() >= 2) {
    result.order = convergence_order(result.trace, config.convergence.threshold, config.convergence.sustain);
  }

  if (!out_dir.empty()) {
    const auto trace_path = out_dir / "trace.csv";
    write_trace_csv(trace_path, result.trace, {"config " + config_to_json(config, -1), "dataset " + data.train.provenance});
    result.written.push_back(trace_path);
    const auto ckpt = out_dir / "final.fplab";
    save_checkpoint(ckpt, result.net);
    result.written.push_back(ckpt);
    if (data.target_spectrum && data.analysis_inputs) {
      const auto target_path = out_dir / "target_spectrum.csv";
      write_spectrum_csv(target_path, *data.target_spectrum);
      const Matrix y = forward_batch(result.net, *data.analysis_inputs);
      const auto output_path = out_dir / "output_spectrum.csv";
      write_spectrum_csv(output_path,
                         dft(column0(y), data.target_spectrum->grid_spacing, data.target_spectrum->origin));
      result.written.push_back(target_path);
      result.written.push_back(output_path);
    }
  }
  return result;
}

}  // namespace fplab
