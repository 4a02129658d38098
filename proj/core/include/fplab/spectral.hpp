#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fplab/network.hpp"
#include "fplab/numerics.hpp"

namespace fplab {

// ---------------------------------------------------------------------------
// Discrete transforms of sampled functions
// ---------------------------------------------------------------------------

/// DFT coefficients F[k] = sum_n f(x_n) exp(-2 pi i k n / N) of samples on the
/// grid x_n = origin + n * grid_spacing.
struct Spectrum {
  std::vector<Complex> coefficients;
  double grid_spacing = 1.0;
  double origin = 0.0;

  std::size_t size() const noexcept { return coefficients.size(); }

  /// Angular frequency of an index: 2 pi index / (N * grid_spacing).
  double k_phys(std::size_t index) const;
};

/// Forward DFT (unnormalized). Radix-2 FFT for power-of-two sizes, direct
/// summation with an exact twiddle table otherwise. Throws on empty input.
Spectrum dft(std::span<const double> samples, double grid_spacing = 1.0, double origin = 0.0);

/// Complex forward (sign = -1) or inverse-direction (sign = +1) transform
/// without normalization.
std::vector<Complex> dft_complex(std::span<const Complex> values, int sign);

/// f[n] = (1/N) sum_k F[k] exp(+2 pi i k n / N).
std::vector<Complex> inverse_dft(const Spectrum& spectrum);
std::vector<double> inverse_dft_real(const Spectrum& spectrum);

/// CSV with columns index, k_phys, re, im, magnitude.
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum);

// ---------------------------------------------------------------------------
// Analytic transform of tanh units
// ---------------------------------------------------------------------------

inline constexpr double kMinWeight = 1e-8;

/// Normalization of the continuous transform.
///  kIntegral:  F(k) = integral tanh(w x + b) exp(-i k x) dx
///              = -i pi exp(+i b k / w) / (|w| sinh(pi k / 2w))
///  kGradientUnits: F(k) = sqrt(pi/2) (i/|w|) exp(-i b k / w) / (exp(pi k/2w) - exp(-pi k/2w))
/// The two differ by complex conjugation and the factor 2 sqrt(2 pi). The
/// per-frequency gradient formulas below are written in kGradientUnits.
enum class FourierConvention { kIntegral, kGradientUnits };

/// kExact keeps 1/(e^s - e^-s); kOneSided replaces it with sgn(s) e^{-|s|},
/// the large-|pi k / w| form the gradient formulas are derived from.
enum class SpectrumForm { kExact, kOneSided };

/// Transform of tanh(w x + b) at angular frequency k != 0 (the delta at k = 0 is
/// not represented). Evaluated as a scaled exponential so large |pi k / 2w|
/// underflows to 0 instead of overflowing.
/// Throws SingularWeightError for |w| < kMinWeight and DomainError for k == 0.
Complex tanh_unit_ft(double w, double b, double k, FourierConvention convention = FourierConvention::kIntegral,
                     SpectrumForm form = SpectrumForm::kExact);

/// sum_j a_j * tanh_unit_ft(w_j, b_j, k) for a {1, N, 1} network. The output
/// bias only contributes at k = 0 and is ignored.
/// Throws UnsupportedArchitecture for any other shape.
Complex network_spectrum_analytic(const NetworkParams& net, double k,
                                  FourierConvention convention = FourierConvention::kIntegral,
                                  SpectrumForm form = SpectrumForm::kExact);

// ---------------------------------------------------------------------------
// Per-frequency differences and losses
// ---------------------------------------------------------------------------

struct FreqDiffEntry {
  Complex d;                      // F[y](k) - F[f](k)
  double amplitude = 0.0;         // |d|
  double phase = 0.0;             // arg d in [-pi, pi]
  std::optional<double> delta_f;  // |d| / |F[f](k)|, empty where F[f](k) is numerically zero
};

struct FreqDiff {
  std::vector<FreqDiffEntry> entries;  // indexed by frequency index
  std::size_t size() const noexcept { return entries.size(); }
};

/// Throws InvalidArgument when the spectra differ in size or grid metadata.
FreqDiff freq_diff(const Spectrum& target, const Spectrum& output);

struct FreqLoss {
  std::vector<double> per_frequency;  // L(k) = |D(k)|^2 / 2
  double total = 0.0;                 // (1/N) sum_k L(k) = 1/2 sum_n (y_n - f_n)^2
};

FreqLoss freq_loss(const FreqDiff& diff);

// ---------------------------------------------------------------------------
// Analytic per-frequency gradients of a one-hidden-layer network
// ---------------------------------------------------------------------------

enum class ParamRole { kA, kW, kB };

const char* role_name(ParamRole role);

/// Differentiating the one-sided spectrum gives the b_j gradient a (C1 + 1)
/// factor; kMinusOne swaps in (C1 - 1) for comparison.
enum class BiasGradientForm { kPlusOne, kMinusOne };

/// Residual D(k) = A e^{i theta} at one positive angular frequency k.
struct FrequencyResidual {
  double k = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct FreqGradientEntry {
  std::size_t neuron = 0;
  ParamRole role = ParamRole::kA;
  double k = 0.0;
  Complex value;                  // dL(k)/dTheta in the |D|^2 convention
  double magnitude = 0.0;         // = amplitude_factor * decay_factor * residual_factor
  double log_magnitude = 0.0;     // -inf when the magnitude is exactly zero
  double decay_factor = 0.0;      // exp(-|pi k / 2 w_j|)
  double log_decay = 0.0;         // -|pi k / 2 w_j|
  double amplitude_factor = 0.0;  // A(k)
  double residual_factor = 0.0;   // G_j(Theta, k)
  bool underflow = false;         // magnitude below 1e-300 and clamped to 0
};

struct FreqGradientReport {
  std::vector<FreqGradientEntry> entries;

  std::vector<double> frequencies() const;  // distinct k, ascending
  bool has_frequency(double k) const;
  // Throws InvalidArgument if absent.
  const FreqGradientEntry& at(std::size_t neuron, ParamRole role, double k) const;
};

/// Phase factors of the gradient formulas for neuron (w, b) at (k, theta):
///   C0 = sqrt(pi/2) exp(i (theta + b k / w))
///   C1 = exp(-2 i (b k / w + theta))
///   C2 = C1 (i (pi k sgn(w) - 2w) - 2bk) + (-i (pi k sgn(w) - 2w) - 2bk)
/// The sgn(w) in C2 extends the formulas to w < 0.
struct PhaseFactors {
  Complex c0, c1, c2;
};

PhaseFactors phase_factors(double w, double b, double k, double theta);

/// Gradients of |D(k)|^2 with respect to a_j, w_j, b_j for every hidden neuron:
///   d/da_j = i (C1 - 1) (C0 / w_j) A exp(-|pi k / 2 w_j|)
///   d/dw_j = C0 C2 (a_j / 2 w_j^3) A exp(-|pi k / 2 w_j|)
///   d/db_j = (C1 + 1) C0 (a_j k / w_j^2) A exp(-|pi k / 2 w_j|)
/// in kGradientUnits. These are twice the gradient of L(k) = |D|^2 / 2. A
/// negative k is mapped to |k| with theta -> -theta (conjugate symmetry).
/// Throws SingularWeightError (|w_j| < kMinWeight), DomainError (k == 0),
/// UnsupportedArchitecture (not {1, N, 1}).
FreqGradientReport analytic_freq_gradients(const NetworkParams& net, std::span<const FrequencyResidual> residuals,
                                           BiasGradientForm bias_form = BiasGradientForm::kPlusOne);

FreqGradientReport analytic_freq_gradients(const NetworkParams& net, const FrequencyResidual& residual,
                                           BiasGradientForm bias_form = BiasGradientForm::kPlusOne);

/// log |dL(k)/dTheta| for Theta = a, w, b of a single neuron, the same
/// quantities analytic_freq_gradients reports as log_magnitude, without
/// building a report. Used by dense parameter sweeps.
std::array<double, 3> log_gradient_magnitudes(double a, double w, double b, const FrequencyResidual& residual,
                                              BiasGradientForm bias_form = BiasGradientForm::kPlusOne);

struct DominanceFlag {
  std::size_t neuron = 0;
  ParamRole role = ParamRole::kA;
  bool dominant = false;  // |dL(k1)/dTheta| > |dL(k2)/dTheta|
};

struct DominanceResult {
  std::vector<DominanceFlag> flags;
  bool all = false;
};

/// Strict comparison of gradient magnitudes (in log space, so it stays exact
/// where the magnitudes themselves underflow). Requires k2 > k1 > 0 and both
/// frequencies present in the report.
DominanceResult dominance_check(const FreqGradientReport& report, double k1, double k2);

// ---------------------------------------------------------------------------
// Peak selection
// ---------------------------------------------------------------------------

struct Peak {
  std::size_t index = 0;
  double magnitude = 0.0;
};

struct PeakSet {
  std::vector<Peak> peaks;  // ascending index
  std::vector<std::size_t> indices() const;
};

inline constexpr std::size_t kDefaultMaxPeaks = 4;
inline constexpr double kDefaultPeakThreshold = 0.05;

/// Strict local maxima of |F| over indices 1..floor(N/2) whose magnitude is at
/// least rel_threshold times the largest magnitude in that range, ascending,
/// truncated to max_peaks. The end indices compare against their one in-range
/// neighbour.
PeakSet select_peaks(const Spectrum& target, std::size_t max_peaks = kDefaultMaxPeaks,
                     double rel_threshold = kDefaultPeakThreshold);

}  // namespace fplab
