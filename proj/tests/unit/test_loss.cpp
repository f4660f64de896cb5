#include <cmath>

#include "test_support.hpp"

using namespace condquant;
using namespace testing_support;

namespace {

std::vector<LossFunction> builtin_losses() {
  return {LossFunction::identity(),       LossFunction::quadratic(),      LossFunction::power(1.0, 1.5),
          LossFunction::power(1.0, 3.0),  LossFunction::exp_integral(1.0), LossFunction::exp_integral(2.0, 1.0),
          RiskSpec::entropic(1.0, 0.3).u1(), RiskSpec::entropic(1.0, 0.3).u2(), RiskSpec::entropic(-0.5).u1()};
}

std::vector<ScoreFunction> builtin_scores() {
  return {ScoreFunction::var(0.2),      ScoreFunction::var(0.9),       ScoreFunction::expectile(0.3),
          ScoreFunction::expectile(0.5), ScoreFunction::entropic(0.5), ScoreFunction::entropic(-1.0),
          ScoreFunction::entropic(0.0)};
}

}  // namespace

TEST(Loss, FamilyTags) {
  EXPECT_EQ(LossFunction::power(1.0, 1.5).family().str(), "power:1,1.5");
  EXPECT_EQ(LossFunction::quadratic().family().str(), "quadratic");
  EXPECT_EQ(LossFunction::exp_integral(1.0, 1.0).family().str(), "exp:1,1");
  EXPECT_EQ(ScoreFunction::var(1.0 / 3.0).family().str(), "var:0.333333333333");
}

TEST(Loss, ParameterChecks) {
  EXPECT_CQ_ERROR(LossFunction::power(1.0, 0.5), ErrorCode::InvalidParameter);
  EXPECT_CQ_ERROR(LossFunction::exp_integral(0.0), ErrorCode::InvalidParameter);
  EXPECT_CQ_ERROR(ScoreFunction::var(1.0), ErrorCode::AlphaOutOfRange);
  EXPECT_CQ_ERROR(ScoreFunction::expectile(0.0), ErrorCode::AlphaOutOfRange);
  EXPECT_CQ_ERROR(LossFunction::tabulated({0.0, 0.0}, {0.0, 1.0}), ErrorCode::InvalidParameter);
}

TEST(Loss, ExampleScore) {
  const ScoreFunction v = score_from_losses(1.0 / 3.0, LossFunction::quadratic(), LossFunction::exp_integral(1.0, 1.0));
  for (double x : {0.1, 0.5, 1.0, 2.5}) EXPECT_NEAR(v(x), 2.0 / 3.0 * x, 1e-15);
  for (double x : {0.0, -0.1, -1.0, -3.0}) EXPECT_NEAR(v(x), -2.0 / 3.0 * std::exp(-x), 1e-14);
}

TEST(Loss, IdentityScoreIsAStep) {
  const ScoreFunction v = score_from_losses(0.5, LossFunction::identity(), LossFunction::identity());
  EXPECT_EQ(v(1e-9), 0.5);
  EXPECT_EQ(v(7.0), 0.5);
  EXPECT_EQ(v(0.0), -0.5);
  EXPECT_EQ(v(-2.0), -0.5);
  EXPECT_EQ(v.left_limit(0.0), -0.5);
  EXPECT_EQ(v.right_limit(0.0), 0.5);
}

TEST(Loss, ScoreAtZeroIsNonPositive) {
  for (double alpha : {0.1, 0.5, 0.9})
    for (const auto& u1 : builtin_losses())
      for (const auto& u2 : builtin_losses()) {
        const ScoreFunction v = score_from_losses(alpha, u1, u2);
        EXPECT_LE(v(0.0), 0.0);
        EXPECT_NEAR(v(0.0), -(1.0 - alpha) * u2.right_deriv(0.0), 1e-15);
        EXPECT_TRUE(validate_score(v, linear_grid(-5, 5, 401)).passed()) << u1.family().str() << " " << u2.family().str();
      }
}

TEST(Loss, ClosedFormReverseConversion) {
  const double alpha = 0.3;
  const LossPair e = losses_from_score(alpha, ScoreFunction::expectile(alpha));
  for (double x : {0.0, 0.5, 1.0, 3.0}) {
    EXPECT_NEAR(e.u1(x), 0.5 * x * x, 1e-14);
    EXPECT_NEAR(e.u2(x), 0.5 * x * x, 1e-14);
    EXPECT_NEAR(e.u1_normalized(x), x * x, 1e-14);
  }
  const LossPair q = losses_from_score(0.8, ScoreFunction::var(0.8));
  for (double x : {0.0, 0.5, 2.0}) {
    EXPECT_NEAR(q.u1(x), x, 1e-14);
    EXPECT_NEAR(q.u2(x), x, 1e-14);
  }
}

TEST(Loss, EntropicLossesMatchQuadrature) {
  for (double gamma : {-1.0, 0.5, 2.0}) {
    const double alpha = 0.4;
    const ScoreFunction v = ScoreFunction::entropic(gamma);
    const LossPair pair = losses_from_score(alpha, v);
    for (double x : {0.25, 1.0, 2.0}) {
      EXPECT_NEAR(pair.u1(x), adaptive_simpson([&](double t) { return v(t); }, 0.0, x) / alpha, 1e-9);
      EXPECT_NEAR(pair.u2(x), -adaptive_simpson([&](double t) { return v(t); }, -x, 0.0) / (1.0 - alpha), 1e-9);
    }
    EXPECT_NEAR(pair.u1_normalized(1.0), 1.0, 1e-14);
    EXPECT_NEAR(pair.u2_normalized(1.0), 1.0, 1e-14);
  }
}

TEST(Loss, RoundTripThroughQuadrature) {
  const ScoreFunction v = ScoreFunction::tabulated({-2, -1, 0, 1, 2}, {-3, -1, 0, 0.5, 2});
  for (double alpha : {0.25, 0.6}) {
    const LossPair pair = losses_from_score(alpha, v);
    const ScoreFunction back = score_from_losses(alpha, pair.u1, pair.u2);
    for (double x : linear_grid(-3.05, 3.05, 123)) EXPECT_NEAR(back(x), v(x), 1e-8) << x;
  }
}

TEST(Loss, RoundTripForBuiltInScores) {
  for (const auto& v : builtin_scores()) {
    const LossPair pair = losses_from_score(0.35, v);
    const ScoreFunction back = score_from_losses(0.35, pair.u1, pair.u2);
    for (double x : linear_grid(-3.01, 3.01, 77)) EXPECT_NEAR(back(x), v(x), 1e-8) << v.family().str() << " " << x;
  }
}

TEST(Loss, DegenerateScoreIsRejected) {
  EXPECT_CQ_ERROR(losses_from_score(0.5, ScoreFunction::tabulated({-1, 0, 1}, {-1, 0, 0})), ErrorCode::DegenerateScore);
}

TEST(Loss, DerivativeInvariants) {
  for (const auto& u : builtin_losses()) {
    double prev_left = 0.0, prev_right = 0.0;
    for (double x : linear_grid(0.01, 3.0, 300)) {
      const double l = u.left_deriv(x), r = u.right_deriv(x);
      EXPECT_LE(l, r + 1e-12) << u.family().str();
      EXPECT_GE(l, prev_left - 1e-12);
      EXPECT_GE(r, prev_right - 1e-12);
      prev_left = l;
      prev_right = r;
      const double h = 1e-8 * std::max(1.0, x);
      EXPECT_NEAR((u(x + h) - u(x)) / h, r, 1e-6 * std::max(1.0, std::abs(r))) << u.family().str() << " " << x;
    }
  }
}

TEST(Loss, PowerFamily) {
  for (double beta : {1.0, 1.5, 2.0, 3.0}) {
    const LossFunction u = LossFunction::power(1.0, beta);
    EXPECT_DOUBLE_EQ(u(1.0), 1.0);
    for (double x : {0.3, 1.0, 2.0}) {
      EXPECT_NEAR(u.left_deriv(x), beta * std::pow(x, beta - 1.0), 1e-14);
      EXPECT_EQ(u.left_deriv(x), u.right_deriv(x));
    }
  }
  EXPECT_TRUE(validate_loss(LossFunction::power(2.0, 2.0), linear_grid(0, 3)).violates("unit_at_one"));
  EXPECT_TRUE(validate_loss(LossFunction::power(1.0, 2.0), linear_grid(0, 3)).passed());
  EXPECT_EQ(*LossFunction::power(1.0, 2.0).second_deriv_at_zero(), 2.0);
  EXPECT_EQ(*LossFunction::power(1.0, 3.0).second_deriv_at_zero(), 0.0);
  EXPECT_TRUE(std::isinf(*LossFunction::power(1.0, 1.5).second_deriv_at_zero()));
}

TEST(Loss, ValidateLoss) {
  const auto grid = linear_grid(0.0, 4.0, 401);
  EXPECT_TRUE(validate_loss(LossFunction::quadratic(), grid).passed());
  const LossFunction root({[](double x) { return std::sqrt(x); }, [](double x) { return 0.5 / std::sqrt(x); },
                           [](double x) { return x > 0 ? 0.5 / std::sqrt(x) : 1e300; }, std::nullopt, {"sqrt", {}}});
  EXPECT_TRUE(validate_loss(root, grid).violates("convex"));
  const LossFunction shifted({[](double x) { return x + 1.0; }, [](double) { return 1.0; }, [](double) { return 1.0; },
                              0.0, {"x+1", {}}});
  EXPECT_TRUE(validate_loss(shifted, grid).violates("zero_at_origin"));
  EXPECT_TRUE(validate_loss(LossFunction::exponential_raw(), grid).violates("zero_at_origin"));
  EXPECT_TRUE(validate_loss(LossFunction::exp_integral(1.0, 1.0), grid).violates("unit_at_one"));
  for (const auto& u : builtin_losses()) {
    const ValidationReport r = validate_loss(u, grid);
    EXPECT_FALSE(r.violates("convex") || r.violates("strictly_increasing") || r.violates("derivative_order"))
        << u.family().str();
  }
}

TEST(Loss, ValidateScore) {
  const auto grid = linear_grid(-5.0, 5.0, 1001);
  EXPECT_TRUE(validate_score(ScoreFunction::entropic(1.5), grid).passed());
  const ScoreFunction down({[](double x) { return -x; }, {}, {}, {"neg", {}}});
  EXPECT_TRUE(validate_score(down, grid).violates("non_decreasing"));
  const ScoreFunction lifted({[](double x) { return x + 0.5; }, {}, {}, {"lift", {}}});
  EXPECT_TRUE(validate_score(lifted, grid).violates("sign_left_of_zero"));
  EXPECT_CQ_ERROR(ShortfallSpec{lifted}, ErrorCode::ValidationError);
}

TEST(Loss, ShiftedScore) {
  const ScoreFunction v = ScoreFunction::expectile(0.7).shifted(0.25);
  EXPECT_NEAR(v(1.0), 0.7 * 0.75, 1e-15);
  EXPECT_NEAR(v(0.0), -0.3 * 0.25, 1e-15);
}

TEST(Loss, AdaptiveSimpson) {
  EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-12);
  EXPECT_NEAR(adaptive_simpson([](double x) { return x < 0.3 ? 0.0 : 1.0; }, 0.0, 1.0), 0.7, 1e-9);
  EXPECT_CQ_ERROR(adaptive_simpson([](double) { return std::nan(""); }, 0.0, 1.0), ErrorCode::ScoreNotIntegrable);
}

TEST(Loss, EntropicScoreSigns) {
  EXPECT_NEAR(ScoreFunction::entropic(2.0)(0.5), std::expm1(1.0), 1e-15);
  EXPECT_NEAR(ScoreFunction::entropic(-2.0)(0.5), -std::expm1(-1.0), 1e-15);
  EXPECT_EQ(ScoreFunction::entropic(0.0)(-1.25), -1.25);
  EXPECT_CQ_ERROR(ScoreFunction::entropic(INFINITY), ErrorCode::InvalidParameter);
}
