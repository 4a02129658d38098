#include "fplab/spectral.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include "fplab/error.hpp"
#include "fplab/trace.hpp"

namespace fplab {

namespace {

constexpr Complex kI{0.0, 1.0};
const double kSqrtHalfPi = std::sqrt(kPi / 2.0);
constexpr double kUnderflowFloor = 1e-300;
// |F[f](k)| at or below this fraction of the largest coefficient counts as zero.
constexpr double kZeroCoefficientRel = 1e-12;

// Iterative radix-2 Cooley-Tukey, n a power of two.
void fft_pow2(std::vector<Complex>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<Complex> tw(half);
    for (std::size_t m = 0; m < half; ++m) {
      const double angle = sign * 2.0 * kPi * static_cast<double>(m) / static_cast<double>(len);
      tw[m] = {std::cos(angle), std::sin(angle)};
    }
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t m = 0; m < half; ++m) {
        const Complex u = a[start + m];
        const Complex v = a[start + m + half] * tw[m];
        a[start + m] = u + v;
        a[start + m + half] = u - v;
      }
    }
  }
}

// Direct O(N^2) sum; the twiddle exponent k*n is reduced mod N so every angle is exact.
std::vector<Complex> dft_direct(std::span<const Complex> x, int sign) {
  const std::size_t n = x.size();
  std::vector<Complex> tw(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double angle = sign * 2.0 * kPi * static_cast<double>(m) / static_cast<double>(n);
    tw[m] = {std::cos(angle), std::sin(angle)};
  }
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{0.0, 0.0};
    std::size_t idx = 0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += x[j] * tw[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[k] = acc;
  }
  return out;
}

int sgn(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

void check_weight(double w) {
  if (!(std::abs(w) >= kMinWeight)) {
    throw SingularWeightError("weight " + std::to_string(w) + " is below the singular-weight floor 1e-8");
  }
}

// sgn(s) * exp(-|s|) / (1 - exp(-2|s|)) = 1 / (e^s - e^-s), or its one-sided form.
double inverse_two_sinh(double s, SpectrumForm form) {
  const double e = std::exp(-std::abs(s));
  if (form == SpectrumForm::kOneSided) return sgn(s) * e;
  return sgn(s) * e / (-std::expm1(-2.0 * std::abs(s)));
}

const NetworkParams& require_single_hidden(const NetworkParams& net) {
  const auto dims = net.layer_dims();
  if (dims.size() != 3 || dims[0] != 1 || dims[2] != 1) {
    throw UnsupportedArchitecture(
        "analytic spectrum needs a {1, N, 1} network; use the DFT of sampled outputs for other shapes");
  }
  return net;
}

}  // namespace

double Spectrum::k_phys(std::size_t index) const {
  return 2.0 * kPi * static_cast<double>(index) / (static_cast<double>(size()) * grid_spacing);
}

std::vector<Complex> dft_complex(std::span<const Complex> values, int sign) {
  if (values.empty()) throw InvalidArgument("dft: empty input");
  if (std::has_single_bit(values.size())) {
    std::vector<Complex> a(values.begin(), values.end());
    fft_pow2(a, sign);
    return a;
  }
  return dft_direct(values, sign);
}

Spectrum dft(std::span<const double> samples, double grid_spacing, double origin) {
  if (samples.empty()) throw InvalidArgument("dft: empty input");
  std::vector<Complex> x(samples.begin(), samples.end());
  return Spectrum{dft_complex(x, -1), grid_spacing, origin};
}

std::vector<Complex> inverse_dft(const Spectrum& spectrum) {
  auto out = dft_complex(spectrum.coefficients, +1);
  const double inv = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<double> inverse_dft_real(const Spectrum& spectrum) {
  const auto c = inverse_dft(spectrum);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "index,k_phys,re,im,magnitude\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const Complex c = spectrum.coefficients[i];
    out << i << ',' << format_double(spectrum.k_phys(i)) << ',' << format_double(c.real()) << ','
        << format_double(c.imag()) << ',' << format_double(std::abs(c)) << '\n';
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_spectrum_csv(out, spectrum);
}

Complex tanh_unit_ft(double w, double b, double k, FourierConvention convention, SpectrumForm form) {
  check_weight(w);
  if (k == 0.0) {
    throw DomainError("tanh_unit_ft: k = 0 carries a delta term; compare the DC component (sample mean) instead");
  }
  const double s = kPi * k / (2.0 * w);
  const double h = inverse_two_sinh(s, form);
  const double phase = b * k / w;
  if (convention == FourierConvention::kGradientUnits) {
    return kSqrtHalfPi * (kI / std::abs(w)) * std::polar(1.0, -phase) * h;
  }
  return -2.0 * kPi * (kI / std::abs(w)) * std::polar(1.0, phase) * h;
}

Complex network_spectrum_analytic(const NetworkParams& net, double k, FourierConvention convention,
                                  SpectrumForm form) {
  require_single_hidden(net);
  const Layer& hidden = net.layers[0];
  const Layer& out = net.layers[1];
  Complex acc{0.0, 0.0};
  for (std::size_t j = 0; j < hidden.out_dim(); ++j) {
    acc += out.weights(0, j) * tanh_unit_ft(hidden.weights(j, 0), hidden.bias[j], k, convention, form);
  }
  return acc;
}

FreqDiff freq_diff(const Spectrum& target, const Spectrum& output) {
  if (target.size() != output.size()) {
    throw InvalidArgument("freq_diff: spectra have " + std::to_string(target.size()) + " and " +
                          std::to_string(output.size()) + " coefficients");
  }
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)}); };
  if (!close(target.grid_spacing, output.grid_spacing) || !close(target.origin, output.origin)) {
    throw InvalidArgument("freq_diff: spectra are sampled on different grids");
  }
  double max_target = 0.0;
  for (const auto& c : target.coefficients) max_target = std::max(max_target, std::abs(c));
  const double zero_floor = kZeroCoefficientRel * max_target;

  FreqDiff diff;
  diff.entries.resize(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) {
    FreqDiffEntry& e = diff.entries[k];
    e.d = output.coefficients[k] - target.coefficients[k];
    e.amplitude = std::abs(e.d);
    e.phase = std::arg(e.d);
    const double ref = std::abs(target.coefficients[k]);
    if (ref > zero_floor) e.delta_f = e.amplitude / ref;
  }
  return diff;
}

FreqLoss freq_loss(const FreqDiff& diff) {
  FreqLoss loss;
  loss.per_frequency.reserve(diff.size());
  double sum = 0.0;
  for (const auto& e : diff.entries) {
    const double l = 0.5 * e.amplitude * e.amplitude;
    loss.per_frequency.push_back(l);
    sum += l;
  }
  loss.total = diff.size() == 0 ? 0.0 : sum / static_cast<double>(diff.size());
  return loss;
}

const char* role_name(ParamRole role) {
  switch (role) {
    case ParamRole::kA:
      return "a";
    case ParamRole::kW:
      return "w";
    case ParamRole::kB:
      return "b";
  }
  return "?";
}

PhaseFactors phase_factors(double w, double b, double k, double theta) {
  check_weight(w);
  const double phi = theta + b * k / w;
  PhaseFactors f;
  f.c0 = kSqrtHalfPi * std::polar(1.0, phi);
  f.c1 = std::polar(1.0, -2.0 * phi);
  const double pk = kPi * k * sgn(w) - 2.0 * w;
  const double bk2 = 2.0 * b * k;
  f.c2 = f.c1 * Complex(-bk2, pk) + Complex(-bk2, -pk);
  return f;
}

std::vector<double> FreqGradientReport::frequencies() const {
  std::set<double> ks;
  for (const auto& e : entries) ks.insert(e.k);
  return {ks.begin(), ks.end()};
}

bool FreqGradientReport::has_frequency(double k) const {
  return std::ranges::any_of(entries, [k](const FreqGradientEntry& e) { return e.k == k; });
}

const FreqGradientEntry& FreqGradientReport::at(std::size_t neuron, ParamRole role, double k) const {
  for (const auto& e : entries) {
    if (e.neuron == neuron && e.role == role && e.k == k) return e;
  }
  throw InvalidArgument("gradient report has no entry for neuron " + std::to_string(neuron) + ", role " +
                        role_name(role) + ", k = " + std::to_string(k));
}

namespace {

struct GradientTerm {
  ParamRole role;
  Complex unit_value;  // gradient / (A * decay)
  double residual;     // G
};

struct NeuronGradient {
  double log_decay;
  std::array<GradientTerm, 3> terms;
};

// Caller guarantees k > 0 and |w| >= kMinWeight.
NeuronGradient neuron_gradient(double a, double w, double b, double k, double theta, BiasGradientForm bias_form) {
  const double aw = std::abs(w);
  const PhaseFactors pf = phase_factors(w, b, k, theta);
  const Complex bias_factor = bias_form == BiasGradientForm::kPlusOne ? pf.c1 + 1.0 : pf.c1 - 1.0;
  return NeuronGradient{
      -std::abs(kPi * k / (2.0 * w)),
      {{
          {ParamRole::kA, kI * (pf.c1 - 1.0) * pf.c0 / w, kSqrtHalfPi * std::abs(pf.c1 - 1.0) / aw},
          {ParamRole::kW, pf.c0 * pf.c2 * a / (2.0 * w * w * w),
           kSqrtHalfPi * std::abs(pf.c2) * std::abs(a) / (2.0 * aw * aw * aw)},
          {ParamRole::kB, bias_factor * pf.c0 * a * k / (w * w),
           kSqrtHalfPi * std::abs(bias_factor) * std::abs(a) * k / (w * w)},
      }}};
}

FrequencyResidual normalize_residual(FrequencyResidual r) {
  if (r.k == 0.0) throw DomainError("analytic_freq_gradients: k = 0 is handled as the DC component");
  if (!(r.amplitude >= 0.0)) throw InvalidArgument("analytic_freq_gradients: amplitude must be >= 0");
  if (r.k < 0.0) {
    r.k = -r.k;
    r.phase = -r.phase;
  }
  return r;
}

double log_magnitude(double amplitude, double log_decay, double residual) {
  if (amplitude == 0.0 || residual == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(amplitude) + log_decay + std::log(residual);
}

}  // namespace

FreqGradientReport analytic_freq_gradients(const NetworkParams& net, std::span<const FrequencyResidual> residuals,
                                           BiasGradientForm bias_form) {
  require_single_hidden(net);
  const Layer& hidden = net.layers[0];
  const Layer& out = net.layers[1];
  const std::size_t n = hidden.out_dim();
  for (std::size_t j = 0; j < n; ++j) check_weight(hidden.weights(j, 0));

  FreqGradientReport report;
  report.entries.reserve(residuals.size() * n * 3);
  for (const FrequencyResidual& raw : residuals) {
    const FrequencyResidual r = normalize_residual(raw);
    for (std::size_t j = 0; j < n; ++j) {
      const NeuronGradient g = neuron_gradient(out.weights(0, j), hidden.weights(j, 0), hidden.bias[j], r.k, r.phase,
                                               bias_form);
      const double decay = std::exp(g.log_decay);
      for (const GradientTerm& t : g.terms) {
        FreqGradientEntry e;
        e.neuron = j;
        e.role = t.role;
        e.k = r.k;
        e.decay_factor = decay;
        e.log_decay = g.log_decay;
        e.amplitude_factor = r.amplitude;
        e.residual_factor = t.residual;
        e.log_magnitude = log_magnitude(r.amplitude, g.log_decay, t.residual);
        e.magnitude = r.amplitude * decay * t.residual;
        e.value = t.unit_value * (r.amplitude * decay);
        if (e.magnitude < kUnderflowFloor && std::isfinite(e.log_magnitude)) {
          e.underflow = true;
          e.magnitude = 0.0;
          e.value = 0.0;
        }
        report.entries.push_back(e);
      }
    }
  }
  return report;
}

std::array<double, 3> log_gradient_magnitudes(double a, double w, double b, const FrequencyResidual& residual,
                                              BiasGradientForm bias_form) {
  check_weight(w);
  const FrequencyResidual r = normalize_residual(residual);
  const NeuronGradient g = neuron_gradient(a, w, b, r.k, r.phase, bias_form);
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = log_magnitude(r.amplitude, g.log_decay, g.terms[i].residual);
  return out;
}

FreqGradientReport analytic_freq_gradients(const NetworkParams& net, const FrequencyResidual& residual,
                                           BiasGradientForm bias_form) {
  return analytic_freq_gradients(net, std::span<const FrequencyResidual>(&residual, 1), bias_form);
}

DominanceResult dominance_check(const FreqGradientReport& report, double k1, double k2) {
  if (!(k2 > k1 && k1 > 0.0)) throw InvalidArgument("dominance_check: requires k2 > k1 > 0");
  if (!report.has_frequency(k1) || !report.has_frequency(k2)) {
    throw InvalidArgument("dominance_check: frequency missing from the gradient report");
  }
  DominanceResult result;
  result.all = true;
  for (const auto& e : report.entries) {
    if (e.k != k1) continue;
    const FreqGradientEntry& high = report.at(e.neuron, e.role, k2);
    const bool dominant = e.log_magnitude > high.log_magnitude;
    result.flags.push_back({e.neuron, e.role, dominant});
    result.all = result.all && dominant;
  }
  return result;
}

std::vector<std::size_t> PeakSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(peaks.size());
  for (const auto& p : peaks) out.push_back(p.index);
  return out;
}

PeakSet select_peaks(const Spectrum& target, std::size_t max_peaks, double rel_threshold) {
  if (max_peaks < 1) throw InvalidArgument("select_peaks: max_peaks must be >= 1");
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) {
    throw InvalidArgument("select_peaks: rel_threshold must lie in (0, 1)");
  }
  PeakSet set;
  const std::size_t last = target.size() / 2;
  if (last < 1) return set;

  std::vector<double> mag(last + 1);
  double max_mag = 0.0;
  for (std::size_t k = 1; k <= last; ++k) {
    mag[k] = std::abs(target.coefficients[k]);
    max_mag = std::max(max_mag, mag[k]);
  }
  if (max_mag == 0.0) return set;

  for (std::size_t k = 1; k <= last && set.peaks.size() < max_peaks; ++k) {
    const bool above_left = k == 1 || mag[k] > mag[k - 1];
    const bool above_right = k == last || mag[k] > mag[k + 1];
    if (above_left && above_right && mag[k] >= rel_threshold * max_mag) set.peaks.push_back({k, mag[k]});
  }
  return set;
}

}  // namespace fplab
