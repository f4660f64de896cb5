#include "condquant/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "condquant/random.hpp"

namespace condquant {

// ---------------------------------------------------------------------------
// Measures

ConditionalRiskMeasure ConditionalRiskMeasure::quantile(RiskSpec spec, SolveSettings settings) {
  settings.validate();
  ConditionalRiskMeasure m(Kind::Quantile, settings);
  m.fingerprint_ = spec.fingerprint() + " " + settings.str();
  m.score_ = spec.score();
  m.quantile_ = std::move(spec);
  return m;
}

ConditionalRiskMeasure ConditionalRiskMeasure::shortfall(ShortfallSpec spec, SolveSettings settings) {
  settings.validate();
  ConditionalRiskMeasure m(Kind::Shortfall, settings);
  m.fingerprint_ = spec.fingerprint() + " " + settings.str();
  m.score_ = spec.score();
  m.shortfall_ = std::move(spec);
  return m;
}

ConditionalRiskMeasure ConditionalRiskMeasure::entropic_closed_form(double gamma) {
  if (std::isnan(gamma) || gamma == -std::numeric_limits<double>::infinity())
    throw Error(ErrorCode::InvalidParameter, "gamma must be finite or +infinity");
  ConditionalRiskMeasure m(Kind::EntropicClosedForm, SolveSettings{});
  m.gamma_ = gamma;
  char buf[64];
  std::snprintf(buf, sizeof buf, "entropic_closed_form(gamma=%.12g)", gamma);
  m.fingerprint_ = buf;
  if (std::isfinite(gamma)) m.score_ = ScoreFunction::entropic(gamma);
  return m;
}

RandomVariable ConditionalRiskMeasure::operator()(const RandomVariable& x, const Partition& g) const {
  switch (kind_) {
    case Kind::Quantile: return conditional_generalized_quantile(x, g, *quantile_, settings_);
    case Kind::Shortfall: return conditional_shortfall(x, g, *shortfall_, settings_);
    case Kind::EntropicClosedForm: return conditional_entropic(x, g, gamma_);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown measure kind");
}

std::vector<RandomVariable> DynamicRiskMeasure::evaluate(const RandomVariable& x) const {
  std::vector<RandomVariable> out;
  out.reserve(filtration_.stage_count());
  for (const Partition& stage : filtration_.stages()) {
    out.push_back(measure_(x, stage));
    if (!is_measurable(out.back(), stage)) throw Error(ErrorCode::NotMeasurable, "stage output is not measurable");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural conditions on the loss pair

std::optional<double> entropic_parameter(const ScoreFunction& v) {
  const double v1 = v(1.0), vm1 = v(-1.0);
  if (!(v1 > 0.0) || !(vm1 < 0.0)) return std::nullopt;
  double gamma = std::log(-v1 / vm1);
  if (std::abs(gamma) < 1e-9) gamma = 0.0;
  const double c = gamma == 0.0 ? v1 : v1 / std::expm1(gamma);
  for (int k = -60; k <= 60; ++k) {
    const double x = 0.05 * k;
    const double expected = gamma == 0.0 ? c * x : c * std::expm1(gamma * x);
    if (std::abs(v(x) - expected) > 1e-9 * std::max(1.0, std::abs(expected))) return std::nullopt;
  }
  return gamma;
}

namespace {

bool derivative_shape(const LossFunction& u, bool want_convex) {
  const auto grid = linear_grid(0.0, 10.0, 1001);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double a = u.right_deriv(grid[i - 1]), b = u.right_deriv(grid[i]), c = u.right_deriv(grid[i + 1]);
    const double slack = 1e-9 * std::max({1.0, std::abs(a), std::abs(c)});
    const double chord = 0.5 * (a + c);
    if (want_convex ? b > chord + slack : b < chord - slack) return false;
  }
  return true;
}

bool strictly_increasing_derivative(const LossFunction& u) {
  const auto grid = linear_grid(0.0, 10.0, 1001);
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(u.right_deriv(grid[i]) > u.right_deriv(grid[i - 1]))) return false;
  return true;
}

bool smooth_at_origin(const RiskSpec& spec) {
  const auto s1 = spec.u1().second_deriv_at_zero(), s2 = spec.u2().second_deriv_at_zero();
  if (!s1 || !s2 || !std::isfinite(*s1) || !std::isfinite(*s2)) return false;
  return std::abs(spec.u1().right_deriv(0.0)) <= 1e-12 && std::abs(spec.u2().right_deriv(0.0)) <= 1e-12;
}

}  // namespace

bool convexity_condition(const RiskSpec& spec) {
  const auto s1 = spec.u1().second_deriv_at_zero(), s2 = spec.u2().second_deriv_at_zero();
  if (!s1 || !s2) throw Error(ErrorCode::MissingSecondDerivative, "loss pair lacks u''(0)");
  if (!smooth_at_origin(spec)) return false;
  if (!derivative_shape(spec.u1(), true) || !derivative_shape(spec.u2(), false)) return false;
  const double lhs = spec.alpha() * *s1, rhs = (1.0 - spec.alpha()) * *s2;
  return lhs >= rhs - 1e-12 * std::max(1.0, std::abs(rhs));
}

bool coherency_hypotheses(const RiskSpec& spec) {
  return smooth_at_origin(spec) && strictly_increasing_derivative(spec.u1()) &&
         strictly_increasing_derivative(spec.u2());
}

std::string_view to_string(Property p) noexcept {
  switch (p) {
    case Property::AlphaMonotonicity: return "alpha_monotonicity";
    case Property::Monotonicity: return "monotonicity";
    case Property::TranslationInvariance: return "translation_invariance";
    case Property::Normalization: return "normalization";
    case Property::ConditionalConvexity: return "conditional_convexity";
    case Property::PositiveHomogeneity: return "positive_homogeneity";
    case Property::SequentialConsistency: return "sequential_consistency";
    case Property::TowerProperty: return "tower_property";
    case Property::Supermartingale: return "supermartingale";
    case Property::ContinuityFromBelow: return "continuity_from_below";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::HoldsOnSuite ? "holds-on-suite" : "violated";
}

// ---------------------------------------------------------------------------
// Suites

namespace {

constexpr double kPremiseSlack = 1e-9;

struct Instance {
  SpacePtr space;
  std::vector<Partition> partitions;
  RandomVariable x;
  std::optional<RandomVariable> y;
  std::optional<RandomVariable> lambda;
  std::size_t stage = 0;
  std::size_t stage_from = 0;
  int direction = 1;
};

using Magnitude = std::optional<double>;
using Evaluator = std::function<Magnitude(const Instance&)>;

double max_of(const RandomVariable& r) { return r.max(); }

Witness to_witness(const Instance& inst, double magnitude) {
  Witness w;
  w.probs.assign(inst.space->probs().begin(), inst.space->probs().end());
  for (const auto& p : inst.partitions) {
    std::vector<int> labels;
    for (std::size_t l : p.labels()) labels.push_back(static_cast<int>(l));
    w.partitions.push_back(std::move(labels));
  }
  w.x = inst.x;
  w.y = inst.y;
  w.lambda = inst.lambda;
  w.stage = inst.stage;
  w.stage_from = inst.stage_from;
  w.direction = inst.direction;
  w.magnitude = magnitude;
  return w;
}

Instance from_witness(const Witness& w) {
  Instance inst;
  inst.space = make_space(w.probs);
  for (const auto& labels : w.partitions) inst.partitions.push_back(Partition::from_labels(inst.space, labels));
  inst.x = w.x;
  inst.y = w.y;
  inst.lambda = w.lambda;
  inst.stage = w.stage;
  inst.stage_from = w.stage_from;
  inst.direction = w.direction;
  return inst;
}

// Draws the single-partition part of an instance.
Instance single_partition_instance(InstanceGenerator& gen, const SuiteOptions& o) {
  Instance inst;
  if (o.partition) {
    inst.space = o.partition->space_ptr();
    inst.partitions = {*o.partition};
  } else {
    inst.space = gen.space(o.min_outcomes, o.max_outcomes);
    inst.partitions = {gen.partition(inst.space)};
  }
  inst.x = gen.variable(inst.space->size(), o.value_range);
  return inst;
}

std::vector<Partition> filtration_stages(InstanceGenerator& gen, const SuiteOptions& o, std::size_t min_outcomes,
                                         SpacePtr& space) {
  if (o.filtration) {
    space = o.filtration->stage(0).space_ptr();
    return o.filtration->stages();
  }
  space = gen.space(std::max(o.min_outcomes, min_outcomes), std::max(o.max_outcomes, min_outcomes));
  return gen.filtration(space).stages();
}

PropertyReport run_suite(Property property, const SuiteOptions& o, double tolerance,
                         const std::function<std::vector<Instance>(InstanceGenerator&)>& make,
                         const Evaluator& evaluate) {
  PropertyReport report;
  report.property = property;
  report.tolerance = tolerance;
  for (std::size_t trial = 0; trial < o.trials; ++trial) {
    InstanceGenerator gen(o.seed, trial);
    for (const Instance& inst : make(gen)) {
      const Magnitude m = evaluate(inst);
      if (!m) continue;
      ++report.checks;
      if (*m > report.max_violation_magnitude) {
        report.max_violation_magnitude = *m;
        if (*m > tolerance) report.witness = to_witness(inst, *m);
      }
    }
    ++report.trials;
  }
  report.verdict = report.max_violation_magnitude > tolerance ? Verdict::Violated : Verdict::HoldsOnSuite;
  return report;
}

// Per-property magnitudes. Positive values are violations.

Evaluator alpha_monotonicity_eval(const ConditionalRiskMeasure& low, const ConditionalRiskMeasure& high) {
  return [&low, &high](const Instance& inst) -> Magnitude {
    return max_of(low(inst.x, inst.partitions[0]) - high(inst.x, inst.partitions[0]));
  };
}

Evaluator monotonicity_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    return max_of(m(inst.x, inst.partitions[0]) - m(*inst.y, inst.partitions[0]));
  };
}

Evaluator translation_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    const auto& g = inst.partitions[0];
    const RandomVariable& h = *inst.lambda;
    const RandomVariable diff = m(inst.x + h, g) - m(inst.x, g) - h;
    return std::max(diff.max(), -diff.min());
  };
}

Evaluator normalization_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    const RandomVariable r = m(inst.x, inst.partitions[0]);
    return std::max(r.max(), -r.min());
  };
}

Evaluator convexity_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    const auto& g = inst.partitions[0];
    const RandomVariable& lam = *inst.lambda;
    const RandomVariable one_minus = RandomVariable::constant(lam.size(), 1.0) - lam;
    const RandomVariable mix = lam * inst.x + one_minus * *inst.y;
    return max_of(m(mix, g) - lam * m(inst.x, g) - one_minus * m(*inst.y, g));
  };
}

Evaluator homogeneity_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    const auto& g = inst.partitions[0];
    const RandomVariable& lam = *inst.lambda;
    const RandomVariable diff = m(lam * inst.x, g) - lam * m(inst.x, g);
    return std::max(diff.max(), -diff.min());
  };
}

Evaluator sequential_eval(const ConditionalRiskMeasure& m, SequentialDirection direction) {
  return [&m, direction](const Instance& inst) -> Magnitude {
    // Flip signs so that the "<= 0" branch covers both directions.
    const double s = inst.direction;
    const RandomVariable later = s * m(inst.x, inst.partitions[inst.stage]);
    const RandomVariable earlier = s * m(inst.x, inst.partitions[inst.stage_from]);
    if (direction == SequentialDirection::InformationToInitial) {
      if (later.max() > kPremiseSlack) return std::nullopt;
      return earlier.max() - std::max(0.0, later.max());
    }
    if (earlier.max() > kPremiseSlack) return std::nullopt;
    return later.max() - std::max(0.0, earlier.max());
  };
}

Evaluator tower_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    const Partition& initial = inst.partitions.front();
    const RandomVariable composed = m(m(inst.x, inst.partitions[inst.stage]), initial);
    return std::abs(composed[0] - m(inst.x, initial)[0]);
  };
}

Evaluator supermartingale_eval(const ConditionalRiskMeasure& m) {
  return [&m](const Instance& inst) -> Magnitude {
    const Partition& initial = inst.partitions.front();
    return expectation(m(inst.x, inst.partitions[inst.stage]), *inst.space) - m(inst.x, initial)[0];
  };
}

std::vector<std::size_t> continuity_ladder(std::size_t horizon) {
  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= std::min<std::size_t>(horizon, 50); ++n) ns.push_back(n);
  for (std::size_t base = 100; base <= horizon; base *= 10)
    for (std::size_t f : {1, 2, 5})
      if (base * f <= horizon) ns.push_back(base * f);
  if (ns.back() != horizon) ns.push_back(horizon);
  return ns;
}

Evaluator continuity_eval(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  return [&m, o](const Instance& inst) -> Magnitude {
    const auto& g = inst.partitions[0];
    const RandomVariable& d = *inst.y;
    const RandomVariable limit = m(inst.x, g);
    double worst_decrease = 0.0;
    std::optional<RandomVariable> previous;
    for (std::size_t n : continuity_ladder(o.continuity_horizon)) {
      const double scale = 1.0 / std::pow(static_cast<double>(n), o.continuity_rate);
      RandomVariable current = m(inst.x - scale * d, g);
      if (previous) worst_decrease = std::max(worst_decrease, max_of(*previous - current));
      previous = std::move(current);
    }
    const RandomVariable gap = limit - *previous;
    const double final_gap = std::max(gap.max(), -gap.min());
    return std::max(worst_decrease - o.tol, final_gap - o.continuity_gap);
  };
}

std::vector<std::size_t> selected_stages(const SuiteOptions& o, std::size_t first, std::size_t last_exclusive) {
  std::vector<std::size_t> out;
  for (std::size_t t = first; t < last_exclusive; ++t)
    if (!o.stage || *o.stage == t) out.push_back(t);
  return out;
}

}  // namespace

PropertyReport check_monotone_alpha(const RiskSpec& low, const RiskSpec& high, const SolveSettings& settings,
                                    const SuiteOptions& o) {
  const auto m_low = ConditionalRiskMeasure::quantile(low, settings);
  const auto m_high = ConditionalRiskMeasure::quantile(high, settings);
  auto make = [&o](InstanceGenerator& gen) { return std::vector<Instance>{single_partition_instance(gen, o)}; };
  PropertyReport r = run_suite(Property::AlphaMonotonicity, o, o.tol, make, alpha_monotonicity_eval(m_low, m_high));
  r.note = "alpha " + std::to_string(low.alpha()) + " vs " + std::to_string(high.alpha());
  return r;
}

PropertyReport check_monotonicity(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    Instance inst = single_partition_instance(gen, o);
    std::vector<double> y(inst.x.values().begin(), inst.x.values().end());
    for (double& v : y)
      if (gen.uniform(0.0, 1.0) < 0.5) v += gen.uniform(0.0, 0.5 * o.value_range);
    inst.y = RandomVariable(std::move(y));
    return std::vector<Instance>{inst};
  };
  return run_suite(Property::Monotonicity, o, o.tol, make, monotonicity_eval(m));
}

PropertyReport check_translation_invariance(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    Instance inst = single_partition_instance(gen, o);
    inst.lambda = gen.measurable(inst.partitions[0], -o.value_range, o.value_range);
    return std::vector<Instance>{inst};
  };
  return run_suite(Property::TranslationInvariance, o, o.tol, make, translation_eval(m));
}

PropertyReport check_normalization(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    Instance inst = single_partition_instance(gen, o);
    inst.x = RandomVariable::constant(inst.space->size(), 0.0);
    return std::vector<Instance>{inst};
  };
  return run_suite(Property::Normalization, o, o.tol, make, normalization_eval(m));
}

PropertyReport check_conditional_convexity(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    Instance inst = single_partition_instance(gen, o);
    inst.y = gen.variable(inst.space->size(), o.value_range);
    inst.lambda = gen.measurable(inst.partitions[0], 0.0, 1.0);
    return std::vector<Instance>{inst};
  };
  return run_suite(Property::ConditionalConvexity, o, o.tol, make, convexity_eval(m));
}

PropertyReport check_positive_homogeneity(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    Instance inst = single_partition_instance(gen, o);
    inst.lambda = gen.measurable(inst.partitions[0], 0.0, 3.0);
    return std::vector<Instance>{inst};
  };
  return run_suite(Property::PositiveHomogeneity, o, o.tol, make, homogeneity_eval(m));
}

PropertyReport check_sequential_consistency(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o, &m](InstanceGenerator& gen) {
    SpacePtr space;
    const auto stages = filtration_stages(gen, o, 2, space);
    const RandomVariable x = gen.variable(space->size(), o.value_range);
    std::vector<Instance> out;
    const bool forward = o.direction == SequentialDirection::InformationToInitial;
    for (std::size_t t : selected_stages(o, 1, stages.size())) {
      const std::size_t from_last = o.pairwise ? t : 1;
      for (std::size_t s = 0; s < from_last; ++s) {
        // Shift X so the premise sits on its boundary, where violations would show first.
        const RandomVariable premise_side = m(x, stages[forward ? t : s]);
        for (int direction : {1, -1}) {
          Instance inst;
          inst.space = space;
          inst.partitions = stages;
          inst.x = x - (direction > 0 ? premise_side.max() : premise_side.min());
          inst.stage = t;
          inst.stage_from = s;
          inst.direction = direction;
          out.push_back(inst);
        }
        // The unshifted variable as drawn.
        for (int direction : {1, -1}) {
          Instance inst;
          inst.space = space;
          inst.partitions = stages;
          inst.x = x;
          inst.stage = t;
          inst.stage_from = s;
          inst.direction = direction;
          out.push_back(inst);
        }
      }
    }
    return out;
  };
  PropertyReport r = run_suite(Property::SequentialConsistency, o, o.tol, make, sequential_eval(m, o.direction));
  if (o.direction == SequentialDirection::InitialToInformation) r.note = "direction: initial-to-information";
  if (o.pairwise) r.note += (r.note.empty() ? "" : "; ") + std::string("pairwise stages (extension)");
  return r;
}

PropertyReport check_tower_property(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    SpacePtr space;
    const auto stages = filtration_stages(gen, o, 3, space);
    const RandomVariable x = gen.variable(space->size(), o.value_range);
    std::vector<Instance> out;
    for (std::size_t t : selected_stages(o, 1, stages.size() - 1)) out.push_back({space, stages, x, {}, {}, t, 0, 1});
    return out;
  };
  return run_suite(Property::TowerProperty, o, o.tol, make, tower_eval(m));
}

PropertyReport check_supermartingale(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    SpacePtr space;
    const auto stages = filtration_stages(gen, o, 2, space);
    const RandomVariable x = gen.variable(space->size(), o.value_range);
    std::vector<Instance> out;
    for (std::size_t t : selected_stages(o, 1, stages.size())) out.push_back({space, stages, x, {}, {}, t, 0, 1});
    return out;
  };
  return run_suite(Property::Supermartingale, o, o.tol, make, supermartingale_eval(m));
}

PropertyReport check_continuity_from_below(const ConditionalRiskMeasure& m, const SuiteOptions& o) {
  auto make = [&o](InstanceGenerator& gen) {
    Instance inst = single_partition_instance(gen, o);
    std::vector<double> d(inst.space->size());
    for (double& v : d) v = gen.uniform(0.0, 1.0) < 0.2 ? 0.0 : gen.uniform(0.0, 1.0);
    inst.y = RandomVariable(std::move(d));
    return std::vector<Instance>{inst};
  };
  PropertyReport r = run_suite(Property::ContinuityFromBelow, o, 0.0, make, continuity_eval(m, o));
  char buf[160];
  std::snprintf(buf, sizeof buf, "magnitude = max(decrease - %.3g, gap at n=%zu - %.3g); X_n = X - D/n^%.3g", o.tol,
                o.continuity_horizon, o.continuity_gap, o.continuity_rate);
  r.note = buf;
  return r;
}

double replay_violation(const PropertyReport& report, const ConditionalRiskMeasure& m,
                        const ConditionalRiskMeasure* high, const SuiteOptions& o) {
  if (!report.witness) return 0.0;
  const Instance inst = from_witness(*report.witness);
  Evaluator eval;
  switch (report.property) {
    case Property::AlphaMonotonicity:
      if (!high) throw Error(ErrorCode::InvalidParameter, "alpha monotonicity replay needs the second measure");
      eval = alpha_monotonicity_eval(m, *high);
      break;
    case Property::Monotonicity: eval = monotonicity_eval(m); break;
    case Property::TranslationInvariance: eval = translation_eval(m); break;
    case Property::Normalization: eval = normalization_eval(m); break;
    case Property::ConditionalConvexity: eval = convexity_eval(m); break;
    case Property::PositiveHomogeneity: eval = homogeneity_eval(m); break;
    case Property::SequentialConsistency: eval = sequential_eval(m, o.direction); break;
    case Property::TowerProperty: eval = tower_eval(m); break;
    case Property::Supermartingale: eval = supermartingale_eval(m); break;
    case Property::ContinuityFromBelow: eval = continuity_eval(m, o); break;
  }
  return eval(inst).value_or(0.0);
}

}  // namespace condquant
