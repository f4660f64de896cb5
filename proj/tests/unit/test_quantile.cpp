#include <cmath>

#include "test_support.hpp"

using namespace condquant;
using namespace testing_support;

namespace {

// Reference values computed to 20 digits with an independent arbitrary-precision root finder.
constexpr double kExampleRoot = 1.59420495850877174868;            // e^{a-1} + 2a - 5 = 0
constexpr double kExpectile08On123 = 2.5;                           // alpha = 0.8, uniform {1,2,3}
constexpr double kEntropic2On123 = 2.52215966991589491890;          // log mean exp(2X) / 2
constexpr double kPower3Alpha03On014 = 1.52885674811558443845;      // beta = 3, alpha = 0.3, uniform {0,1,4}

Distribution uniform_on(std::vector<double> pts) {
  std::vector<double> w(pts.size(), 1.0 / static_cast<double>(pts.size()));
  return Distribution::canonical(std::move(pts), std::move(w));
}

std::vector<RiskSpec> strictly_convex_specs() {
  return {RiskSpec::expectile(0.3), RiskSpec::expectile(0.8), RiskSpec::power(0.4, 1.5), RiskSpec::power(0.6, 3.0),
          RiskSpec::entropic(1.0), RiskSpec(0.45, LossFunction::quadratic(), LossFunction::power(1.0, 3.0))};
}

double golden_section(const std::function<double(double)>& f, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  while (b - a > 1e-12) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(Solver, PointMassAndExactJumps) {
  const SolveSettings s;
  const std::vector<double> one{4.0};
  EXPECT_EQ(leftmost_nonpositive([](double) { return 1.0; }, one, s), 4.0);
  const std::vector<double> support{0.0, 1.0, 2.5, 4.0};
  // Step function dropping to <= 0 at 2.5.
  EXPECT_EQ(leftmost_nonpositive([](double x) { return x < 2.5 ? 1.0 : -1.0; }, support, s), 2.5);
  EXPECT_CQ_ERROR(leftmost_nonpositive([](double) { return 1.0; }, support, s), ErrorCode::BracketFailure);
}

TEST(Solver, SmoothRootAndLeftExpansion) {
  const SolveSettings s;
  const std::vector<double> support{0.0, 3.0};
  EXPECT_NEAR(leftmost_nonpositive([](double x) { return 1.7 - x; }, support, s), 1.7, 1e-10);
  // Root left of the support hull.
  EXPECT_NEAR(leftmost_nonpositive([](double x) { return -2.0 - x; }, support, s), -2.0, 1e-10);
  SolveSettings tight = s;
  tight.max_iter = 3;
  EXPECT_CQ_ERROR(leftmost_nonpositive([](double x) { return 1.7 - x; }, support, tight), ErrorCode::MaxIterExceeded);
  SolveSettings bad;
  bad.tol_x = 0.0;
  EXPECT_CQ_ERROR(bad.validate(), ErrorCode::InvalidParameter);
}

TEST(Solver, TrajectoriesAreMonotone) {
  for (std::size_t trial = 0; trial < 200; ++trial) {
    InstanceGenerator gen(17, trial);
    auto space = gen.space(2, 8);
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const Partition g = gen.partition(space);
    const ScoreFunction v = trial % 2 ? ScoreFunction::entropic(gen.uniform(-1, 2)) : ScoreFunction::var(gen.uniform(0.05, 0.95));
    for (std::size_t a = 0; a < g.atom_count(); ++a) {
      SolveTrace trace;
      static_shortfall(conditional_distribution(x, g, a), v, {}, &trace);
      auto pts = trace.points;
      std::sort(pts.begin(), pts.end());
      for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LE(pts[i].second, pts[i - 1].second + 1e-12);
    }
  }
}

TEST(Quantile, PhiAlphaConventions) {
  ThreePoint t;
  const RandomVariable z = rv({1, 1, 3});
  EXPECT_EQ(phi_alpha(t.x, t.x, example_spec()), rv({0, 0, 0}));
  const RandomVariable shifted = phi_alpha(t.x, z, example_spec());
  EXPECT_LT(max_abs_diff(shifted, rv({0, 1.0 / 3.0, 0})), 1e-15);
  const RiskSpec raw(1.0 / 3.0, LossFunction::quadratic(), LossFunction::exponential_raw());
  EXPECT_LT(max_abs_diff(phi_alpha(t.x, z, raw), rv({2.0 / 3.0, 1.0, 2.0 / 3.0})), 1e-15);
}

TEST(Quantile, PiAlpha) {
  ThreePoint t;
  EXPECT_EQ(pi_alpha(t.x, t.x, example_spec(), *t.space), 0.0);
  EXPECT_NEAR(pi_alpha(t.x, rv({2, 2, 2}), RiskSpec::expectile(0.5), *t.space), 1.0 / 3.0, 1e-15);
  // Linear in alpha with slope E[u1((X-Z)^+)] - E[u2((X-Z)^-)].
  const RandomVariable z = rv({1.5, 1.5, 1.5});
  const RiskSpec base(0.3, LossFunction::quadratic(), LossFunction::power(1.0, 3.0));
  const double slope = (1.0 / 3.0) * (0.25 + 2.25) - (1.0 / 3.0) * 0.125;
  EXPECT_NEAR(pi_alpha(t.x, z, base.with_alpha(0.7), *t.space) - pi_alpha(t.x, z, base, *t.space), 0.4 * slope, 1e-14);
  EXPECT_CQ_ERROR(RiskSpec(1.0, LossFunction::quadratic(), LossFunction::quadratic()), ErrorCode::AlphaOutOfRange);
}

TEST(Quantile, StaticReferenceValues) {
  const double a = static_generalized_quantile(uniform_on({1, 2, 3}), example_spec());
  EXPECT_NEAR(a, kExampleRoot, 2e-10);
  EXPECT_NEAR(a, 1.594, 1e-3);
  EXPECT_EQ(static_generalized_quantile(Distribution::point_mass(-2.5), example_spec()), -2.5);
  EXPECT_NEAR(static_generalized_quantile(uniform_on({0, 1}), RiskSpec::expectile(0.8)), 0.8, 2e-10);
  EXPECT_NEAR(static_generalized_quantile(uniform_on({1, 2, 3}), RiskSpec::expectile(0.8)), kExpectile08On123, 2e-10);
  EXPECT_NEAR(static_generalized_quantile(uniform_on({1, 2, 3}), RiskSpec::entropic(2.0)), kEntropic2On123, 2e-10);
  EXPECT_NEAR(static_generalized_quantile(uniform_on({0, 1, 4}), RiskSpec::power(0.3, 3.0)), kPower3Alpha03On014,
              2e-10);
  EXPECT_EQ(static_generalized_quantile(uniform_on({1, 2, 3}), RiskSpec::var(1.0 / 3.0)), 1.0);
}

TEST(Quantile, ConditionalExample) {
  ThreePoint t;
  EXPECT_LT(max_abs_diff(conditional_generalized_quantile(t.x, t.g, example_spec()), rv({1, 1, 3})), 1e-12);
  EXPECT_EQ(conditional_generalized_quantile(t.x, t.full, example_spec()), t.x);
  const RandomVariable r = conditional_generalized_quantile(t.x, t.trivial, example_spec());
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(r[i], static_generalized_quantile(uniform_on({1, 2, 3}), example_spec()));
}

TEST(Quantile, FocAtSolutionAndPerturbation) {
  ThreePoint t;
  const RandomVariable z = conditional_generalized_quantile(t.x, t.g, example_spec());
  EXPECT_TRUE(foc_check(t.x, z, t.g, example_spec(), 1e-8));
  EXPECT_FALSE(foc_check(t.x, z + rv({0.1, 0.1, 0}), t.g, example_spec(), 1e-8));
  EXPECT_FALSE(foc_check(t.x, z + rv({0, 0, 0.1}), t.g, example_spec(), 1e-8));
  EXPECT_CQ_ERROR(foc_check(t.x, rv({1, 2, 3}), t.g, example_spec(), 1e-8), ErrorCode::NotMeasurable);
}

TEST(Quantile, SmoothFocIsAnEquality) {
  for (std::size_t trial = 0; trial < 100; ++trial) {
    InstanceGenerator gen(23, trial);
    auto space = gen.space(2, 8);
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const Partition g = gen.partition(space);
    for (const RiskSpec& spec : {RiskSpec::expectile(gen.uniform(0.05, 0.95)), RiskSpec::entropic(gen.uniform(0.1, 2))}) {
      const RandomVariable z = conditional_generalized_quantile(x, g, spec);
      for (std::size_t a = 0; a < g.atom_count(); ++a) {
        const FocResiduals r = foc_residuals(conditional_distribution(x, g, a), z[g.atom(a).front()], spec);
        EXPECT_NEAR(r.upper, 0.0, 1e-8);
        EXPECT_NEAR(r.lower, 0.0, 1e-8);
      }
    }
  }
}

TEST(Quantile, FocSoundnessOnRandomInstances) {
  for (std::size_t trial = 0; trial < 300; ++trial) {
    InstanceGenerator gen(29, trial);
    auto space = gen.space(2, 8);
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const Partition g = gen.partition(space);
    for (const RiskSpec& spec : strictly_convex_specs()) {
      const RandomVariable z = conditional_generalized_quantile(x, g, spec);
      EXPECT_TRUE(is_measurable(z, g));
      EXPECT_TRUE(foc_check(x, z, g, spec, 1e-8)) << spec.fingerprint();
    }
    const RandomVariable q = conditional_generalized_quantile(x, g, RiskSpec::var(0.35));
    EXPECT_TRUE(foc_check(x, q, g, RiskSpec::var(0.35), 1e-8));
  }
}

TEST(Quantile, GoldenSectionCrossCheck) {
  for (std::size_t trial = 0; trial < 100; ++trial) {
    InstanceGenerator gen(31, trial);
    auto space = gen.space(2, 8);
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const Distribution d = conditional_distribution(x, Partition::trivial(space), 0);
    for (const RiskSpec& spec : strictly_convex_specs()) {
      const double z = static_generalized_quantile(d, spec);
      const double gs = golden_section([&](double c) { return pi_alpha(d, c, spec); }, d.min(), d.max());
      EXPECT_NEAR(z, gs, 1e-5) << spec.fingerprint();
      EXPECT_LE(pi_alpha(d, z, spec), pi_alpha(d, gs, spec) + 1e-12);
    }
  }
}

TEST(Quantile, BruteForceExample) {
  ThreePoint t;
  EXPECT_LT(max_abs_diff(brute_force_quantile(t.x, t.g, example_spec(), 1e-4), rv({1, 1, 3})), 1e-4);
  const std::vector<double> coarse{1, 2, 3};
  EXPECT_EQ(joint_brute_force(t.x, t.g, example_spec(), coarse), rv({1, 1, 3}));
}

TEST(Quantile, BruteForceAgreesWithSolver) {
  for (std::size_t trial = 0; trial < 200; ++trial) {
    InstanceGenerator gen(37, trial);
    auto space = gen.space(2, 8);
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const Partition g = gen.partition(space);
    const double alpha = gen.uniform(0.05, 0.95);
    const double step = 1e-3;
    for (const RiskSpec& spec : {RiskSpec::expectile(alpha), RiskSpec::power(alpha, 1.5), RiskSpec::power(alpha, 3.0)}) {
      EXPECT_LE(max_abs_diff(conditional_generalized_quantile(x, g, spec), brute_force_quantile(x, g, spec, step)),
                step + 1e-10);
    }
    EXPECT_LE(max_abs_diff(conditional_var(x, g, alpha), brute_force_quantile(x, g, RiskSpec::var(alpha), step)), step);
  }
}

TEST(Quantile, JointSearchIsSeparable) {
  std::size_t checked = 0;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    InstanceGenerator gen(41, trial);
    auto space = gen.space(2, 6);
    const Partition g = gen.partition(space);
    if (g.atom_count() > 3) continue;
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const RiskSpec spec = trial % 2 ? RiskSpec::expectile(0.3) : RiskSpec::power(0.7, 1.5);
    const auto grid = linear_grid(x.min(), x.max(), 30);
    const RandomVariable joint = joint_brute_force(x, g, spec, grid);
    EXPECT_EQ(joint, grid_quantile(x, g, spec, grid));
    double per_atom = 0.0;
    for (std::size_t a = 0; a < g.atom_count(); ++a) {
      const Distribution d = conditional_distribution(x, g, a);
      double best = INFINITY;
      for (double c : grid) best = std::min(best, pi_alpha(d, c, spec));
      per_atom += g.atom_probability(a) * best;
    }
    EXPECT_NEAR(pi_alpha(x, joint, spec, *space), per_atom, 1e-12);
    // Two atoms: within grid resolution of the exact per-atom solution.
    if (g.atom_count() == 2)
      EXPECT_LE(max_abs_diff(joint, conditional_generalized_quantile(x, g, spec)), grid[1] - grid[0]);
    ++checked;
  }
  EXPECT_GT(checked, 50u);
  ThreePoint t;
  const std::vector<double> big(51, 1.0);
  EXPECT_CQ_ERROR(joint_brute_force(t.x, t.g, example_spec(), big), ErrorCode::InstanceTooLarge);
  auto s4 = uniform(4);
  const std::vector<double> g3{0, 1};
  EXPECT_CQ_ERROR(joint_brute_force(rv({1, 2, 3, 4}), Partition::discrete(s4), example_spec(), g3),
                  ErrorCode::InstanceTooLarge);
}

TEST(Quantile, MinimizerUniquenessSurrogates) {
  for (std::size_t trial = 0; trial < 150; ++trial) {
    InstanceGenerator gen(43, trial);
    auto space = gen.space(2, 8);
    const RandomVariable x = gen.variable(space->size(), 5.0);
    const Partition g = gen.partition(space);
    const double step = 0.01;
    for (std::size_t a = 0; a < g.atom_count(); ++a) {
      const Distribution d = conditional_distribution(x, g, a);
      const auto grid = uniform_grid(d.min(), d.max(), step);
      // Flat objectives (VaR) can tie: tied minimizers must share the objective value.
      const RiskSpec q = RiskSpec::var(gen.uniform(0.05, 0.95));
      const auto near_q = near_minimizers(d, q, grid);
      for (double c : near_q) EXPECT_NEAR(pi_alpha(d, c, q), pi_alpha(d, near_q.front(), q), 10 * 1e-12 * std::max(1.0, pi_alpha(d, near_q.front(), q)));
      for (const RiskSpec& spec : strictly_convex_specs()) {
        const auto near = near_minimizers(d, spec, grid);
        ASSERT_FALSE(near.empty());
        EXPECT_LE(near.back() - near.front(), 2 * step) << spec.fingerprint();
      }
    }
  }
}

TEST(Quantile, UniformGridEndsAtUpperBound) {
  const auto g = uniform_grid(0.0, 1.0, 0.3);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(uniform_grid(2.0, 2.0, 0.1), std::vector<double>{2.0});
  EXPECT_CQ_ERROR(uniform_grid(0.0, 1.0, 0.0), ErrorCode::InvalidParameter);
}
