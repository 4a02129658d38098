#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fplab/numerics.hpp"
#include "fplab/spectral.hpp"

namespace fplab {

/// Residuals at a low frequency k1 and a high frequency k2 seen by one hidden
/// neuron with output weight a and bias b.
struct TheoremScenario {
  double k1 = 1.0;
  double k2 = 2.0;
  double amplitude1 = 1.0;  // A(k1)
  double amplitude2 = 1.0;  // A(k2)
  double theta1 = 0.0;
  double theta2 = 0.0;
  double a = 0.1;
  double b = 0.1;
  double target_abs_k1 = 1.0;  // |F[f](k1)|
};

/// Throws InvalidArgument unless k2 > k1 > 0, A(k1) > 0, A(k2) >= 0 (finite)
/// and |F[f](k1)| > 0.
void validate(const TheoremScenario& s);

/// One-line "key=value" rendering used in CSV header comments.
std::string describe(const TheoremScenario& s);

inline constexpr double kDefaultPhaseFloor = 0.1;

/// Random scenario with k1 in [0.5, 5], k2 - k1 in [0.5, 5], A(k1) in
/// [0.1, 2], A(k2) in [0, 2], |a| in [0.05, 1], b in [-1, 1] and phases drawn
/// so that |1 - exp(-2i theta1)| and |1 + exp(-2i theta1)| both exceed
/// phase_floor.
TheoremScenario random_scenario(SeededRng& rng, double phase_floor = kDefaultPhaseFloor);

// ---------------------------------------------------------------------------
// Low-frequency dominance at small weights
// ---------------------------------------------------------------------------

struct DominancePoint {
  double delta = 0.0;
  double fraction = 0.0;         // pooled grid and random estimate
  double grid_fraction = 0.0;    // midpoint grid on (0, delta]
  double random_fraction = 0.0;  // uniform draws on (0, delta]
  std::array<double, 3> role_fraction{};  // a, w, b individually (pooled)
};

struct DominanceCurve {
  std::vector<DominancePoint> points;  // delta descending

  /// Fractions never decrease as delta shrinks (allowing `slack`).
  bool non_decreasing(double slack = 0.0) const;
  /// Grid and random estimates agree within `tolerance` at every delta.
  bool estimates_agree(double tolerance = 0.01) const;
};

struct DominanceOptions {
  std::size_t samples_per_delta = 100000;
  std::uint64_t seed = 1;
  bool mirror_negative = true;  // also evaluate -w for every sampled w
  BiasGradientForm bias_form = BiasGradientForm::kPlusOne;
};

/// For each delta, the fraction of w in (0, delta] (and -w when mirrored)
/// where |dL(k1)/dTheta| > |dL(k2)/dTheta| holds for all of Theta = a, w, b.
/// The grid and random draws each contribute samples_per_delta values of w.
/// Throws InvalidArgument for an invalid scenario, a nonpositive or
/// non-descending delta, or samples_per_delta == 0.
DominanceCurve theorem1_fraction(const TheoremScenario& scenario, std::span<const double> deltas,
                                 const DominanceOptions& options = {});

void write_dominance_csv(std::ostream& out, const TheoremScenario& scenario, const DominanceCurve& curve);

// ---------------------------------------------------------------------------
// Gradient-magnitude crossings
// ---------------------------------------------------------------------------

/// kFullDecay: A(k1) = A(k2) exp(-pi (k2 - k1) / |w|) G(k2) / G(k1).
/// kHalfDecay: the same with the exp(-pi k / 2|w|) decay of the gradient formulas.
enum class CrossingConstants { kFullDecay, kHalfDecay };

struct CrossingOptions {
  double phase_floor = kDefaultPhaseFloor;
  CrossingConstants constants = CrossingConstants::kFullDecay;
  BiasGradientForm bias_form = BiasGradientForm::kPlusOne;
};

struct CrossingPoint {
  double w = 0.0;
  double amplitude1 = 0.0;  // implied A(k1) on the a-branch
  double delta_f = 0.0;     // A(k1) / |F[f](k1)| on the a-branch
  /// Delta_F(k1) from the a, w and b gradient crossings. NaN where the k1
  /// residual factor of that branch vanishes.
  std::array<double, 3> branch_delta_f{};
};

struct CrossingResult {
  std::vector<CrossingPoint> points;  // in w_grid order
};

/// Solves |dL(k1)/dTheta| = |dL(k2)/dTheta| for A(k1) at each w, per branch,
/// and reports Delta_F(k1). The amplitude1 field of the scenario is unused.
/// Throws InvalidArgument for an invalid scenario or w == 0 and
/// DegeneratePhaseError when |1 - C1(k1)| <= phase_floor at some w.
CrossingResult crossing_delta_f(const TheoremScenario& scenario, std::span<const double> w_grid,
                                const CrossingOptions& options = {});

void write_crossing_csv(std::ostream& out, const TheoremScenario& scenario, const CrossingResult& result);

}  // namespace fplab
