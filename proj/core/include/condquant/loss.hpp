#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "condquant/error.hpp"

namespace condquant {

/// Family name plus parameters, used for fingerprints and CLI round trips.
struct FamilyTag {
  std::string name;
  std::vector<double> params;

  std::string str() const;
  bool operator==(const FamilyTag&) const = default;
};

/// Increasing convex loss on [0, inf).
///
/// left_deriv(x) is the left derivative for x > 0 and 0 for x <= 0;
/// right_deriv(x) is the right derivative for x >= 0 and 0 for x < 0.
class LossFunction {
 public:
  using Fn = std::function<double(double)>;

  struct Parts {
    Fn eval;
    Fn left_deriv;
    Fn right_deriv;
    std::optional<double> second_deriv_at_zero;
    FamilyTag family;
  };

  explicit LossFunction(Parts parts);

  static LossFunction identity();
  /// a * x^beta, beta >= 1. Only a = 1 satisfies u(1) = 1.
  static LossFunction power(double a, double beta);
  static LossFunction quadratic();
  /// scale * (exp(gamma x) - 1) / gamma, gamma > 0; right derivative scale * exp(gamma x).
  /// Without an explicit scale the loss is normalized to u(1) = 1.
  static LossFunction exp_integral(double gamma, std::optional<double> scale = std::nullopt);
  /// exp(x) exactly as written, including exp(0) = 1.
  static LossFunction exponential_raw();
  /// Piecewise-linear interpolation through (xs, us), extrapolated with the last slope.
  static LossFunction tabulated(std::vector<double> xs, std::vector<double> us);

  double operator()(double x) const { return parts_->eval(x); }
  double left_deriv(double x) const { return x > 0.0 ? parts_->left_deriv(x) : 0.0; }
  double right_deriv(double x) const { return x >= 0.0 ? parts_->right_deriv(x) : 0.0; }
  std::optional<double> second_deriv_at_zero() const { return parts_->second_deriv_at_zero; }
  const FamilyTag& family() const { return parts_->family; }

  LossFunction scaled(double c) const;
  /// u - u(0), so that the result vanishes at the origin.
  LossFunction shifted_to_origin() const;

 private:
  std::shared_ptr<const Parts> parts_;
};

class ScoreFunction {
 public:
  using Fn = std::function<double(double)>;

  struct Parts {
    Fn eval;
    Fn left_limit;   // v(x-); empty means evaluate just left of x
    Fn right_limit;  // v(x+)
    FamilyTag family;
  };

  explicit ScoreFunction(Parts parts);

  /// alpha - 1{x <= 0}: the identity-loss score.
  static ScoreFunction var(double alpha);
  /// alpha x^+ - (1 - alpha) x^-
  static ScoreFunction expectile(double alpha);
  /// exp(gamma x) - 1 for gamma > 0, 1 - exp(gamma x) for gamma < 0, x for gamma = 0.
  static ScoreFunction entropic(double gamma);
  /// alpha u1'_-(x) for x > 0 and -(1 - alpha) u2'_+(-x) for x <= 0.
  static ScoreFunction from_losses(double alpha, const LossFunction& u1, const LossFunction& u2);
  /// Piecewise-linear through (xs, vs), constant beyond the ends.
  static ScoreFunction tabulated(std::vector<double> xs, std::vector<double> vs);

  double operator()(double x) const { return parts_->eval(x); }
  double left_limit(double x) const;
  double right_limit(double x) const;
  const FamilyTag& family() const { return parts_->family; }

  /// v_eps(x) = v(x - eps).
  ScoreFunction shifted(double eps) const;

  /// Present when built by from_losses.
  struct LossSource {
    double alpha;
    LossFunction u1;
    LossFunction u2;
  };
  const std::optional<LossSource>& source() const { return *source_; }

 private:
  std::shared_ptr<const Parts> parts_;
  std::shared_ptr<const std::optional<LossSource>> source_;
};

void require_alpha(double alpha);

ScoreFunction score_from_losses(double alpha, const LossFunction& u1, const LossFunction& u2);

struct LossPair {
  LossFunction u1;  // (1/alpha) * int_0^x v
  LossFunction u2;  // -(1/(1-alpha)) * int_{-x}^0 v
  LossFunction u1_normalized;  // u1 / u1(1)
  LossFunction u2_normalized;
};

/// Integrates the score into a loss pair. Built-in families use closed forms;
/// anything else goes through adaptive Simpson quadrature.
LossPair losses_from_score(double alpha, const ScoreFunction& v);

/// Adaptive composite Simpson on [a, b]; throws ScoreNotIntegrable on failure.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10);

struct Violation {
  std::string condition;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool passed() const noexcept { return violations.empty(); }
  bool violates(std::string_view condition) const;
};

/// `points` equally spaced samples on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t points = 1001);

/// Grid falsification of membership in the increasing-convex loss class.
/// Condition names: zero_at_origin, unit_at_one, strictly_increasing, convex,
/// derivative_order, derivative_monotone.
ValidationReport validate_loss(const LossFunction& u, std::span<const double> grid);

/// Condition names: non_decreasing, sign_left_of_zero, sign_right_of_zero.
ValidationReport validate_score(const ScoreFunction& v, std::span<const double> grid);

}  // namespace condquant
