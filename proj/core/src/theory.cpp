#include "fplab/theory.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "fplab/error.hpp"
#include "fplab/trace.hpp"

namespace fplab {

namespace {

void validate_frequencies(const TheoremScenario& s) {
  if (!(s.k1 > 0.0)) throw InvalidArgument("scenario: k1 must be > 0");
  if (!(s.k2 > s.k1)) throw InvalidArgument("scenario: k2 must be > k1");
  if (!(s.amplitude2 >= 0.0) || !std::isfinite(s.amplitude2)) throw InvalidArgument("scenario: A(k2) must be finite and >= 0");
  if (!(s.target_abs_k1 > 0.0)) throw InvalidArgument("scenario: |F[f](k1)| must be > 0");
}

struct DominanceCount {
  std::size_t all = 0;
  std::array<std::size_t, 3> role{};
  std::size_t total = 0;
};

void count_dominance(const TheoremScenario& s, double w, const FrequencyResidual& r1, const FrequencyResidual& r2,
                     BiasGradientForm form, DominanceCount& c) {
  const auto low = log_gradient_magnitudes(s.a, w, s.b, r1, form);
  const auto high = log_gradient_magnitudes(s.a, w, s.b, r2, form);
  bool all = true;
  for (std::size_t i = 0; i < 3; ++i) {
    const bool d = low[i] > high[i];
    c.role[i] += d;
    all = all && d;
  }
  c.all += all;
  ++c.total;
}

double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

// Residual factors of the a, w, b gradients at one frequency, up to factors
// common to both sides of a crossing.
std::array<double, 3> branch_factors(double w, double b, double k, double theta, BiasGradientForm form) {
  const PhaseFactors pf = phase_factors(w, b, k, theta);
  const Complex bias = form == BiasGradientForm::kPlusOne ? pf.c1 + 1.0 : pf.c1 - 1.0;
  return {std::abs(1.0 - pf.c1), std::abs(pf.c2), k * std::abs(bias)};
}

}  // namespace

void validate(const TheoremScenario& s) {
  validate_frequencies(s);
  if (!(s.amplitude1 > 0.0)) throw InvalidArgument("scenario: A(k1) must be > 0");
}

std::string describe(const TheoremScenario& s) {
  std::ostringstream o;
  o << "k1=" << format_double(s.k1) << " k2=" << format_double(s.k2) << " A1=" << format_double(s.amplitude1)
    << " A2=" << format_double(s.amplitude2) << " theta1=" << format_double(s.theta1)
    << " theta2=" << format_double(s.theta2) << " a=" << format_double(s.a) << " b=" << format_double(s.b)
    << " target_abs_k1=" << format_double(s.target_abs_k1);
  return o.str();
}

TheoremScenario random_scenario(SeededRng& rng, double phase_floor) {
  TheoremScenario s;
  s.k1 = rng.uniform(0.5, 5.0);
  s.k2 = s.k1 + rng.uniform(0.5, 5.0);
  s.amplitude1 = rng.uniform(0.1, 2.0);
  s.amplitude2 = rng.uniform(0.0, 2.0);
  do {
    s.theta1 = rng.uniform(-kPi, kPi);
  } while (std::abs(1.0 - std::polar(1.0, -2.0 * s.theta1)) <= phase_floor ||
           std::abs(1.0 + std::polar(1.0, -2.0 * s.theta1)) <= phase_floor);
  s.theta2 = rng.uniform(-kPi, kPi);
  s.a = rng.uniform(0.05, 1.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  s.b = rng.uniform(-1.0, 1.0);
  s.target_abs_k1 = rng.uniform(0.1, 2.0);
  return s;
}

bool DominanceCurve::non_decreasing(double slack) const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].fraction < points[i - 1].fraction - slack) return false;
  }
  return true;
}

bool DominanceCurve::estimates_agree(double tolerance) const {
  for (const auto& p : points) {
    if (std::abs(p.grid_fraction - p.random_fraction) > tolerance) return false;
  }
  return true;
}

DominanceCurve theorem1_fraction(const TheoremScenario& scenario, std::span<const double> deltas,
                                 const DominanceOptions& options) {
  validate(scenario);
  if (options.samples_per_delta == 0) throw InvalidArgument("theorem1_fraction: samples_per_delta must be > 0");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw InvalidArgument("theorem1_fraction: every delta must be > 0");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw InvalidArgument("theorem1_fraction: deltas must be descending");
  }

  const FrequencyResidual r1{scenario.k1, scenario.amplitude1, scenario.theta1};
  const FrequencyResidual r2{scenario.k2, scenario.amplitude2, scenario.theta2};
  const std::size_t n = options.samples_per_delta;

  DominanceCurve curve;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    auto visit = [&](double w, DominanceCount& c) {
      if (std::abs(w) < kMinWeight) return;
      count_dominance(scenario, w, r1, r2, options.bias_form, c);
      if (options.mirror_negative) count_dominance(scenario, -w, r1, r2, options.bias_form, c);
    };

    DominanceCount grid, random;
    for (std::size_t i = 0; i < n; ++i) {
      visit(delta * (static_cast<double>(i) + 0.5) / static_cast<double>(n), grid);
    }
    // Same stream for every delta, so the ladder compares like with like.
    SeededRng rng(options.seed);
    for (std::size_t i = 0; i < n; ++i) visit(delta * (1.0 - rng.uniform()), random);

    DominancePoint p;
    p.delta = delta;
    p.grid_fraction = ratio(grid.all, grid.total);
    p.random_fraction = ratio(random.all, random.total);
    p.fraction = ratio(grid.all + random.all, grid.total + random.total);
    for (std::size_t r = 0; r < 3; ++r) p.role_fraction[r] = ratio(grid.role[r] + random.role[r], grid.total + random.total);
    curve.points.push_back(p);
  }
  return curve;
}

void write_dominance_csv(std::ostream& out, const TheoremScenario& scenario, const DominanceCurve& curve) {
  CsvTable t;
  t.comments.push_back("scenario " + describe(scenario));
  t.header = {"delta", "fraction", "grid_fraction", "random_fraction", "fraction_a", "fraction_w", "fraction_b"};
  for (const auto& p : curve.points) {
    t.rows.push_back({p.delta, p.fraction, p.grid_fraction, p.random_fraction, p.role_fraction[0], p.role_fraction[1],
                      p.role_fraction[2]});
  }
  write_csv(out, t);
}

CrossingResult crossing_delta_f(const TheoremScenario& scenario, std::span<const double> w_grid,
                                const CrossingOptions& options) {
  validate_frequencies(scenario);
  if (!(options.phase_floor > 0.0)) throw InvalidArgument("crossing_delta_f: phase floor must be > 0");
  const double decay_scale = options.constants == CrossingConstants::kFullDecay ? 1.0 : 0.5;
  const double dk = scenario.k2 - scenario.k1;
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  CrossingResult result;
  result.points.reserve(w_grid.size());
  for (const double w : w_grid) {
    if (w == 0.0 || !std::isfinite(w)) throw InvalidArgument("crossing_delta_f: w must be finite and nonzero");
    const auto g1 = branch_factors(w, scenario.b, scenario.k1, scenario.theta1, options.bias_form);
    const auto g2 = branch_factors(w, scenario.b, scenario.k2, scenario.theta2, options.bias_form);
    if (g1[0] <= options.phase_floor) {
      throw DegeneratePhaseError("crossing_delta_f: |1 - C1(k1)| = " + format_double(g1[0]) + " at w = " +
                                 format_double(w) + " is within the phase floor");
    }
    const double scale =
        scenario.amplitude2 * std::exp(-decay_scale * kPi * dk / std::abs(w)) / scenario.target_abs_k1;

    CrossingPoint p;
    p.w = w;
    for (std::size_t i = 0; i < 3; ++i) p.branch_delta_f[i] = g1[i] > 0.0 ? scale * g2[i] / g1[i] : kNaN;
    p.delta_f = p.branch_delta_f[0];
    p.amplitude1 = p.delta_f * scenario.target_abs_k1;
    result.points.push_back(p);
  }
  return result;
}

void write_crossing_csv(std::ostream& out, const TheoremScenario& scenario, const CrossingResult& result) {
  CsvTable t;
  t.comments.push_back("scenario " + describe(scenario));
  t.header = {"w", "amplitude_k1", "delta_f", "delta_f_a", "delta_f_w", "delta_f_b"};
  for (const auto& p : result.points) {
    t.rows.push_back({p.w, p.amplitude1, p.delta_f, p.branch_delta_f[0], p.branch_delta_f[1], p.branch_delta_f[2]});
  }
  write_csv(out, t);
}

}  // namespace fplab
