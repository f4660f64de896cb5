#include "condquant/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace condquant {

RiskSpec::RiskSpec(double alpha, LossFunction u1, LossFunction u2)
    : alpha_(alpha), u1_(std::move(u1)), u2_(std::move(u2)), score_(score_from_losses(alpha, u1_, u2_)) {}

RiskSpec RiskSpec::expectile(double alpha) { return {alpha, LossFunction::quadratic(), LossFunction::quadratic()}; }

RiskSpec RiskSpec::var(double alpha) { return {alpha, LossFunction::identity(), LossFunction::identity()}; }

RiskSpec RiskSpec::power(double alpha, double beta, double a1, double a2) {
  return {alpha, LossFunction::power(a1, beta), LossFunction::power(a2, beta)};
}

RiskSpec RiskSpec::entropic(double gamma, double alpha) {
  LossPair pair = losses_from_score(alpha, ScoreFunction::entropic(gamma));
  return {alpha, std::move(pair.u1), std::move(pair.u2)};
}

std::string RiskSpec::fingerprint() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", alpha_);
  return std::string("quantile(alpha=") + buf + ",u1=" + u1_.family().str() + ",u2=" + u2_.family().str() + ")";
}

RandomVariable phi_alpha(const RandomVariable& x, const RandomVariable& z, const RiskSpec& spec) {
  if (x.size() != z.size()) throw Error(ErrorCode::SpaceMismatch, "X and Z differ in length");
  const double a = spec.alpha();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    out[i] = a * spec.u1()(std::max(d, 0.0)) + (1.0 - a) * spec.u2()(std::max(-d, 0.0));
  }
  return RandomVariable(std::move(out));
}

double pi_alpha(const RandomVariable& x, const RandomVariable& z, const RiskSpec& spec, const ProbabilitySpace& space) {
  return expectation(phi_alpha(x, z, spec), space);
}

double pi_alpha(const Distribution& dist, double z, const RiskSpec& spec) {
  const double a = spec.alpha();
  double total = 0.0;
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    const double d = dist.support[i] - z;
    total += dist.weights[i] * (a * spec.u1()(std::max(d, 0.0)) + (1.0 - a) * spec.u2()(std::max(-d, 0.0)));
  }
  return total;
}

double first_order_gap(const Distribution& dist, double x, const RiskSpec& spec) {
  const double a = spec.alpha();
  double up = 0.0, down = 0.0;
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    const double s = dist.support[i];
    if (s > x) up += dist.weights[i] * spec.u1().left_deriv(s - x);
    else down += dist.weights[i] * spec.u2().right_deriv(x - s);
  }
  return a * up - (1.0 - a) * down;
}

FocResiduals foc_residuals(const Distribution& dist, double z, const RiskSpec& spec) {
  const double a = spec.alpha();
  double left1 = 0.0, right2 = 0.0, right1 = 0.0, left2 = 0.0;
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    const double s = dist.support[i], w = dist.weights[i];
    if (s > z) left1 += w * spec.u1().left_deriv(s - z);
    if (s <= z) right2 += w * spec.u2().right_deriv(z - s);
    if (s >= z) right1 += w * spec.u1().right_deriv(s - z);
    if (s < z) left2 += w * spec.u2().left_deriv(z - s);
  }
  return {a * left1 - (1.0 - a) * right2, a * right1 - (1.0 - a) * left2};
}

double static_generalized_quantile(const Distribution& dist, const RiskSpec& spec, const SolveSettings& settings,
                                   SolveTrace* trace) {
  if (dist.support.size() == 1) return dist.support.front();
  return leftmost_nonpositive([&](double x) { return first_order_gap(dist, x, spec); }, dist.support, settings, trace);
}

RandomVariable conditional_generalized_quantile(const RandomVariable& x, const Partition& g, const RiskSpec& spec,
                                                const SolveSettings& settings) {
  require_same_size(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a)
    per_atom[a] = static_generalized_quantile(conditional_distribution(x, g, a), spec, settings);
  return broadcast(g, per_atom);
}

bool foc_check(const RandomVariable& x, const RandomVariable& z, const Partition& g, const RiskSpec& spec, double tol) {
  require_same_size(x, g);
  require_same_size(z, g);
  if (!is_measurable(z, g)) throw Error(ErrorCode::NotMeasurable, "Z is not constant on the atoms of G");
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const FocResiduals r = foc_residuals(conditional_distribution(x, g, a), z[g.atom(a).front()], spec);
    if (r.upper > tol || r.lower < -tol) return false;
  }
  return true;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid step must be positive");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  grid.reserve(count + 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double p = lo + static_cast<double>(k) * step;
    if (p >= hi) break;
    grid.push_back(p);
  }
  grid.push_back(hi);
  return grid;
}

namespace {

double near_tolerance(double minimum, double tol_f) { return tol_f * std::max(1.0, std::abs(minimum)); }

double leftmost_near_min(const Distribution& dist, const RiskSpec& spec, std::span<const double> grid, double tol_f) {
  std::vector<double> values(grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    values[k] = pi_alpha(dist, grid[k], spec);
    best = std::min(best, values[k]);
  }
  const double cut = best + near_tolerance(best, tol_f);
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (values[k] <= cut) return grid[k];
  return grid.back();
}

}  // namespace

std::vector<double> near_minimizers(const Distribution& dist, const RiskSpec& spec, std::span<const double> grid,
                                    double tol_f) {
  std::vector<double> values(grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    values[k] = pi_alpha(dist, grid[k], spec);
    best = std::min(best, values[k]);
  }
  const double cut = best + near_tolerance(best, tol_f);
  std::vector<double> out;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (values[k] <= cut) out.push_back(grid[k]);
  return out;
}

RandomVariable brute_force_quantile(const RandomVariable& x, const Partition& g, const RiskSpec& spec, double grid_step,
                                    double tol_f) {
  require_same_size(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const Distribution dist = conditional_distribution(x, g, a);
    const auto grid = uniform_grid(dist.min(), dist.max(), grid_step);
    per_atom[a] = leftmost_near_min(dist, spec, grid, tol_f);
  }
  return broadcast(g, per_atom);
}

RandomVariable grid_quantile(const RandomVariable& x, const Partition& g, const RiskSpec& spec,
                             std::span<const double> grid, double tol_f) {
  require_same_size(x, g);
  if (grid.empty()) throw Error(ErrorCode::InvalidParameter, "empty candidate grid");
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a)
    per_atom[a] = leftmost_near_min(conditional_distribution(x, g, a), spec, grid, tol_f);
  return broadcast(g, per_atom);
}

RandomVariable joint_brute_force(const RandomVariable& x, const Partition& g, const RiskSpec& spec,
                                 std::span<const double> grid, double tol_f) {
  require_same_size(x, g);
  const std::size_t atoms = g.atom_count();
  if (atoms > 3) throw Error(ErrorCode::InstanceTooLarge, "joint search supports at most 3 atoms");
  if (grid.empty() || grid.size() > 50) throw Error(ErrorCode::InstanceTooLarge, "joint search needs 1..50 grid points");

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t combos = 1;
  for (std::size_t a = 0; a < atoms; ++a) combos *= sorted.size();

  // Index digits run most-significant first, so increasing combo index is lexicographic order.
  auto decision = [&](std::size_t combo) {
    std::vector<double> per_atom(atoms);
    for (std::size_t a = atoms; a-- > 0;) {
      per_atom[a] = sorted[combo % sorted.size()];
      combo /= sorted.size();
    }
    return broadcast(g, per_atom);
  };

  std::vector<double> values(combos);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < combos; ++c) {
    values[c] = pi_alpha(x, decision(c), spec, g.space());
    best = std::min(best, values[c]);
  }
  const double cut = best + near_tolerance(best, tol_f);
  for (std::size_t c = 0; c < combos; ++c)
    if (values[c] <= cut) return decision(c);
  return decision(combos - 1);
}

}  // namespace condquant
