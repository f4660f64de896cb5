#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condquant/quantile.hpp"
#include "condquant/shortfall.hpp"
#include "condquant/space.hpp"

namespace condquant {

/// The map (X, G) -> rho^G(X) behind a dynamic risk measure.
class ConditionalRiskMeasure {
 public:
  static ConditionalRiskMeasure quantile(RiskSpec spec, SolveSettings settings = {});
  static ConditionalRiskMeasure shortfall(ShortfallSpec spec, SolveSettings settings = {});
  /// Closed-form log-exponential evaluation; gamma may be +infinity.
  static ConditionalRiskMeasure entropic_closed_form(double gamma);

  RandomVariable operator()(const RandomVariable& x, const Partition& g) const;

  const std::string& fingerprint() const noexcept { return fingerprint_; }
  /// Acceptance score; for quantile specs this is the derived score.
  const std::optional<ScoreFunction>& score() const noexcept { return score_; }
  const std::optional<RiskSpec>& quantile_spec() const noexcept { return quantile_; }
  const SolveSettings& settings() const noexcept { return settings_; }

 private:
  enum class Kind { Quantile, Shortfall, EntropicClosedForm };
  ConditionalRiskMeasure(Kind kind, SolveSettings settings) : kind_(kind), settings_(settings) {}

  Kind kind_;
  SolveSettings settings_;
  std::optional<RiskSpec> quantile_;
  std::optional<ShortfallSpec> shortfall_;
  std::optional<ScoreFunction> score_;
  double gamma_ = 0.0;
  std::string fingerprint_;
};

class DynamicRiskMeasure {
 public:
  DynamicRiskMeasure(Filtration filtration, ConditionalRiskMeasure measure)
      : filtration_(std::move(filtration)), measure_(std::move(measure)) {}

  const Filtration& filtration() const noexcept { return filtration_; }
  const ConditionalRiskMeasure& measure() const noexcept { return measure_; }

  /// One variable per stage, each measurable with respect to its stage.
  std::vector<RandomVariable> evaluate(const RandomVariable& x) const;

 private:
  Filtration filtration_;
  ConditionalRiskMeasure measure_;
};

inline std::vector<RandomVariable> dynamic_eval(const RandomVariable& x, const DynamicRiskMeasure& drm) {
  return drm.evaluate(x);
}

/// gamma if v is a positive multiple of the entropic score (x for gamma = 0),
/// checked on a grid over [-3, 3].
std::optional<double> entropic_parameter(const ScoreFunction& v);

/// u1' convex, u2' concave, alpha u1''(0) >= (1-alpha) u2''(0), together with
/// u1'(0) = u2'(0) = 0 and finite second derivatives at the origin.
/// Throws MissingSecondDerivative if either loss has no second derivative record.
bool convexity_condition(const RiskSpec& spec);

/// Finite u''(0), u'(0) = 0 and strictly increasing derivatives for both losses.
/// Under these, failing convexity_condition implies a convexity counterexample
/// on finitely generated sub-sigma-algebras.
bool coherency_hypotheses(const RiskSpec& spec);

enum class Property {
  AlphaMonotonicity,
  Monotonicity,
  TranslationInvariance,
  Normalization,
  ConditionalConvexity,
  PositiveHomogeneity,
  SequentialConsistency,
  TowerProperty,
  Supermartingale,
  ContinuityFromBelow,
};

std::string_view to_string(Property p) noexcept;

enum class Verdict { HoldsOnSuite, Violated };
std::string_view to_string(Verdict v) noexcept;

/// Concrete instance that exhibits a violation, replayable through replay_violation.
struct Witness {
  std::vector<double> probs;
  /// Label vectors: a single partition, or every stage of a filtration.
  std::vector<std::vector<int>> partitions;
  RandomVariable x;
  std::optional<RandomVariable> y;
  std::optional<RandomVariable> lambda;
  std::size_t stage = 0;
  std::size_t stage_from = 0;
  int direction = 1;
  double magnitude = 0.0;
};

struct PropertyReport {
  Property property;
  Verdict verdict = Verdict::HoldsOnSuite;
  std::optional<Witness> witness;
  double max_violation_magnitude = 0.0;
  double tolerance = 0.0;
  std::size_t trials = 0;
  /// Trials whose premise held (sequential consistency) or checks performed.
  std::size_t checks = 0;
  std::string note;

  bool found_witness(double threshold) const { return witness && witness->magnitude >= threshold; }
};

enum class SequentialDirection {
  /// rho^{F_t}(X) <= 0 implies rho^{F_0}(X) <= 0, and likewise for >= 0.
  InformationToInitial,
  /// rho^{F_0}(X) <= 0 implies rho^{F_t}(X) <= 0, as literally displayed; fails in general.
  InitialToInformation,
};

struct SuiteOptions {
  std::uint64_t seed = 42;
  std::size_t trials = 500;
  std::size_t min_outcomes = 2;
  std::size_t max_outcomes = 8;
  double value_range = 5.0;
  double tol = 1e-8;
  /// Restrict to this partition instead of drawing one per trial.
  std::optional<Partition> partition;
  /// Restrict to this filtration instead of drawing one per trial.
  std::optional<Filtration> filtration;
  /// Restrict time-consistency checks to a single stage.
  std::optional<std::size_t> stage;
  SequentialDirection direction = SequentialDirection::InformationToInitial;
  /// Also check every pair of stages s < t (extension beyond the F_0-anchored form).
  bool pairwise = false;
  /// X_n = X - D / n^rate with D uniform in [0, 1] per outcome.
  double continuity_rate = 2.0;
  std::size_t continuity_horizon = 10000;
  double continuity_gap = 1e-6;
};

PropertyReport check_monotone_alpha(const RiskSpec& low, const RiskSpec& high, const SolveSettings& settings,
                                    const SuiteOptions& options);
PropertyReport check_monotonicity(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_translation_invariance(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_normalization(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_conditional_convexity(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_positive_homogeneity(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_sequential_consistency(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_tower_property(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_supermartingale(const ConditionalRiskMeasure& m, const SuiteOptions& options);
PropertyReport check_continuity_from_below(const ConditionalRiskMeasure& m, const SuiteOptions& options);

/// Re-evaluates the recorded witness; `high` is the second measure for AlphaMonotonicity.
double replay_violation(const PropertyReport& report, const ConditionalRiskMeasure& m,
                        const ConditionalRiskMeasure* high = nullptr, const SuiteOptions& options = {});

}  // namespace condquant
