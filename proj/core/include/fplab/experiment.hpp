#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fplab/dataset.hpp"
#include "fplab/network.hpp"
#include "fplab/optimizer.hpp"
#include "fplab/spectral.hpp"
#include "fplab/trace.hpp"

namespace fplab {

enum class ExperimentKind { kFit1d, kFitImage, kFitMnist, kFlip };

/// "fit-1d", "fit-image", "fit-mnist", "flip-experiment".
const char* experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

struct DatasetRecipe {
  // fit-1d and flip-experiment
  std::string target = "lowfreq";  // lowfreq | linear | custom
  std::vector<double> samples;     // target values for "custom"
  std::size_t count = 120;
  double lo = -10.0;
  double hi = 10.0;
  // fit-image
  std::string image;
  std::size_t row = 0;    // row whose x-spectrum is tracked
  bool row_only = false;  // train on that row alone as a 1-d regression
  // fit-mnist
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t train_limit = 2000;
  std::size_t test_limit = 1000;
};

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 0;  // 0 = full batch
  long epochs = 1000;
  Reduction reduction = Reduction::kMean;
  double stop_at_loss = 0.0;  // 0 disables early stopping
};

struct PeakSettings {
  bool track = true;
  std::size_t max_peaks = kDefaultMaxPeaks;
  double rel_threshold = kDefaultPeakThreshold;
  std::vector<std::size_t> indices;  // explicit peak indices; empty = select from the target spectrum
};

struct ConvergenceRule {
  double threshold = 0.3;
  std::size_t sustain = 5;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kFit1d;
  DatasetRecipe dataset;
  std::vector<std::size_t> layer_dims;
  double weight_std = 0.1;
  double bias_std = 0.1;
  double init_mean = 0.0;
  OptimizerSettings optimizer;
  long recording_interval = 1;
  PeakSettings peaks;
  ConvergenceRule convergence;
  bool spectral_norms = true;
  int power_iterations = 10;
  long checkpoint_interval = 0;  // also save a checkpoint at every multiple of this epoch; 0 = final only
  std::string output_dir;        // empty = write nothing
  std::uint64_t seed = 1;

  /// Initialization drawn from `seed`.
  InitSpec init_spec() const;
};

/// Defaults for each experiment family, populated from the reference setups.
ExperimentConfig default_config(ExperimentKind kind);

/// Throws ConfigError for inconsistent settings (bad architecture, peak
/// tracking on a classification run, missing data paths, ...).
void validate(const ExperimentConfig& config);

/// Network input width implied by the dataset recipe (784 for MNIST is
/// checked against the files at load time).
std::size_t expected_input_dim(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Convergence order
// ---------------------------------------------------------------------------

struct PeakConvergence {
  std::size_t peak = 0;
  std::optional<long> epoch;  // first epoch of a sustained run below the threshold
};

struct ConvergenceOrder {
  std::vector<PeakConvergence> peaks;  // ascending frequency index
  bool in_order = true;                // convergence epochs non-decreasing with frequency
  // First adjacent pair (lower, higher) where the higher peak converged first.
  std::optional<std::pair<std::size_t, std::size_t>> violation;
};

/// A peak converges at the first record that starts `sustain` consecutive
/// records with Delta_F < threshold. Peaks that never converge sort after all
/// converged ones. max_peaks > 0 restricts the check to the lowest peaks.
ConvergenceOrder convergence_order(const TrainTrace& trace, double threshold = 0.3, std::size_t sustain = 5,
                                   std::size_t max_peaks = 0);

// ---------------------------------------------------------------------------
// Extra-high-frequency energy
// ---------------------------------------------------------------------------

/// Share of non-DC energy above index floor(train_count / 2) in the one-sided
/// DFT of samples taken on a grid dense_factor times finer than a training
/// grid of train_count points. 0 when there is no non-DC energy.
double extra_high_freq_energy(std::span<const double> dense_samples, std::size_t train_count);

/// Samples a 1-d network on train_grid refined dense_factor times.
/// Throws InvalidArgument for dense_factor < 2 or a network whose input is not 1-d.
double extra_high_freq_energy(const NetworkParams& net, const Grid1d& train_grid, std::size_t dense_factor);

/// Fraction of rows whose output argmax equals the target argmax.
double accuracy(const Matrix& outputs, const Matrix& targets);

// ---------------------------------------------------------------------------
// Running experiments
// ---------------------------------------------------------------------------

struct ExperimentData {
  Dataset train;
  Dataset test;  // may be empty
  // Samples whose output spectrum is tracked (1-d grid or one image row).
  std::optional<Matrix> analysis_inputs;
  std::optional<Spectrum> target_spectrum;
};

/// Builds the datasets named by the recipe. Throws ConfigError, IoError or ParseError.
ExperimentData prepare_data(const ExperimentConfig& config);

struct ExperimentResult {
  TrainTrace trace;  // first record is the initial state (epoch 0)
  NetworkParams net;
  PeakSet peaks;
  std::optional<ConvergenceOrder> order;
  long epochs_run = 0;
  bool stopped_early = false;
  std::vector<std::filesystem::path> written;
};

/// Trains the configured network and records losses, Delta_F at the tracked
/// peaks, parameter statistics, spectral norms and (for MNIST) accuracies.
/// Extra observers run after the built-in ones, including on the initial record.
/// When output_dir is set, writes trace.csv (prefixed by the config), the
/// final checkpoint and, for regressions, the target and output spectra.
ExperimentResult run_experiment(const ExperimentConfig& config, std::span<const Observer> extra_observers = {});
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                std::span<const Observer> extra_observers = {});

}  // namespace fplab
