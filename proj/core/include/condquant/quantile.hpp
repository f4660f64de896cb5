#pragma once

#include <span>
#include <string>
#include <vector>

#include "condquant/loss.hpp"
#include "condquant/solver.hpp"
#include "condquant/space.hpp"

namespace condquant {

/// Confidence level plus the loss pair of the asymmetric objective
///   alpha * E[u1((X-x)^+)] + (1-alpha) * E[u2((X-x)^-)].
class RiskSpec {
 public:
  RiskSpec(double alpha, LossFunction u1, LossFunction u2);

  /// u1 = u2 = x^2.
  static RiskSpec expectile(double alpha);
  /// u1 = u2 = x; the minimizer is the left alpha-quantile.
  static RiskSpec var(double alpha);
  static RiskSpec power(double alpha, double beta, double a1 = 1.0, double a2 = 1.0);
  /// Loss pair integrated from the entropic score; the induced measure does not depend on alpha.
  static RiskSpec entropic(double gamma, double alpha = 0.5);

  double alpha() const noexcept { return alpha_; }
  const LossFunction& u1() const noexcept { return u1_; }
  const LossFunction& u2() const noexcept { return u2_; }
  const ScoreFunction& score() const noexcept { return score_; }
  RiskSpec with_alpha(double alpha) const { return {alpha, u1_, u2_}; }
  std::string fingerprint() const;

 private:
  double alpha_;
  LossFunction u1_;
  LossFunction u2_;
  ScoreFunction score_;
};

/// Pointwise alpha*u1((X-Z)^+) + (1-alpha)*u2((X-Z)^-).
RandomVariable phi_alpha(const RandomVariable& x, const RandomVariable& z, const RiskSpec& spec);
double pi_alpha(const RandomVariable& x, const RandomVariable& z, const RiskSpec& spec, const ProbabilitySpace& space);

/// Expected loss of a distribution at a scalar decision.
double pi_alpha(const Distribution& dist, double z, const RiskSpec& spec);

/// First-order function g(x) = alpha E[u1'_-((X-x)^+); X>x] - (1-alpha) E[u2'_+((X-x)^-); X<=x].
/// Non-increasing in x; the leftmost minimizer is the smallest x with g(x) <= 0.
double first_order_gap(const Distribution& dist, double x, const RiskSpec& spec);

/// Leftmost minimizer of x -> pi_alpha over the support hull.
double static_generalized_quantile(const Distribution& dist, const RiskSpec& spec, const SolveSettings& settings = {},
                                   SolveTrace* trace = nullptr);

/// Atom-by-atom static solve on the conditional distributions.
RandomVariable conditional_generalized_quantile(const RandomVariable& x, const Partition& g, const RiskSpec& spec,
                                                const SolveSettings& settings = {});

/// Both one-sided optimality inequalities on every atom, within tol.
/// Throws NotMeasurable if z is not constant on the atoms of g.
bool foc_check(const RandomVariable& x, const RandomVariable& z, const Partition& g, const RiskSpec& spec, double tol);

struct FocResiduals {
  /// alpha E[u1'_-] - (1-alpha) E[u2'_+], must be <= 0.
  double upper;
  /// alpha E[u1'_+] - (1-alpha) E[u2'_-], must be >= 0.
  double lower;
};
FocResiduals foc_residuals(const Distribution& dist, double z, const RiskSpec& spec);

/// Grid points on [min, max] with spacing `step`; the last point is max exactly.
std::vector<double> uniform_grid(double lo, double hi, double step);

/// Grid points whose objective lies within tol_f (relative, floor 1) of the grid minimum.
std::vector<double> near_minimizers(const Distribution& dist, const RiskSpec& spec, std::span<const double> grid,
                                    double tol_f = 1e-12);

/// Exhaustive per-atom grid search on [atom min X, atom max X], leftmost near-minimal point.
RandomVariable brute_force_quantile(const RandomVariable& x, const Partition& g, const RiskSpec& spec, double grid_step,
                                    double tol_f = 1e-12);

/// Per-atom leftmost near-minimizer over an explicit candidate list.
RandomVariable grid_quantile(const RandomVariable& x, const Partition& g, const RiskSpec& spec,
                             std::span<const double> grid, double tol_f = 1e-12);

/// Search over the full product grid of G-measurable decisions, leftmost in
/// lexicographic atom order. At most 3 atoms and 50 grid points.
RandomVariable joint_brute_force(const RandomVariable& x, const Partition& g, const RiskSpec& spec,
                                 std::span<const double> grid, double tol_f = 1e-12);

}  // namespace condquant
