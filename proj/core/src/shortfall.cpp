#include "condquant/shortfall.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace condquant {

ShortfallSpec::ShortfallSpec(ScoreFunction v) : v_(std::move(v)) {
  const auto report = validate_score(v_, linear_grid(-10.0, 10.0, 2001));
  if (!report.passed())
    throw Error(ErrorCode::ValidationError,
                "score " + v_.family().str() + " violates " + report.violations.front().condition + ": " +
                    report.violations.front().detail);
}

std::string ShortfallSpec::fingerprint() const { return "shortfall(v=" + v_.family().str() + ")"; }

double static_shortfall(const Distribution& dist, const ScoreFunction& v, const SolveSettings& settings,
                        SolveTrace* trace) {
  if (dist.support.size() == 1) return dist.support.front();
  auto g = [&](double z) {
    double total = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i) total += dist.weights[i] * v(dist.support[i] - z);
    return total;
  };
  return leftmost_nonpositive(g, dist.support, settings, trace);
}

RandomVariable conditional_shortfall(const RandomVariable& x, const Partition& g, const ShortfallSpec& spec,
                                     const SolveSettings& settings) {
  require_same_size(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a)
    per_atom[a] = static_shortfall(conditional_distribution(x, g, a), spec.score(), settings);
  return broadcast(g, per_atom);
}

namespace {

EquivalenceReport compare(RandomVariable q, RandomVariable s, const SolveSettings& settings) {
  EquivalenceReport report{std::move(q), std::move(s), 0.0, 2.0 * settings.tol_x, false};
  for (std::size_t i = 0; i < report.quantile.size(); ++i)
    report.max_discrepancy = std::max(report.max_discrepancy, std::abs(report.quantile[i] - report.shortfall[i]));
  report.passed = report.max_discrepancy <= report.tolerance;
  return report;
}

}  // namespace

EquivalenceReport equivalence_check(const RandomVariable& x, const Partition& g, const RiskSpec& qspec,
                                    const SolveSettings& settings) {
  const ScoreFunction v = score_from_losses(qspec.alpha(), qspec.u1(), qspec.u2());
  return compare(conditional_generalized_quantile(x, g, qspec, settings),
                 conditional_shortfall(x, g, ShortfallSpec(v), settings), settings);
}

EquivalenceReport reverse_equivalence_check(const RandomVariable& x, const Partition& g, const ScoreFunction& v,
                                            double alpha, const SolveSettings& settings) {
  const LossPair pair = losses_from_score(alpha, v);
  const RiskSpec qspec(alpha, pair.u1, pair.u2);
  return compare(conditional_generalized_quantile(x, g, qspec, settings),
                 conditional_shortfall(x, g, ShortfallSpec(v), settings), settings);
}

RandomVariable conditional_var(const RandomVariable& x, const Partition& g, double alpha) {
  require_alpha(alpha);
  require_same_size(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const Distribution dist = conditional_distribution(x, g, a);
    double cumulative = 0.0;
    per_atom[a] = dist.max();
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
      cumulative += dist.weights[i];
      if (cumulative >= alpha - 1e-12) {
        per_atom[a] = dist.support[i];
        break;
      }
    }
  }
  return broadcast(g, per_atom);
}

RandomVariable conditional_expectile(const RandomVariable& x, const Partition& g, double alpha,
                                     const SolveSettings& settings) {
  require_alpha(alpha);
  require_same_size(x, g);
  settings.validate();
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const Distribution dist = conditional_distribution(x, g, a);
    // h(z) = alpha E[(X-z)^+] - (1-alpha) E[(z-X)^+], strictly decreasing and linear between support points.
    auto h = [&](double z) {
      double up = 0.0, down = 0.0;
      for (std::size_t i = 0; i < dist.support.size(); ++i) {
        up += dist.weights[i] * std::max(dist.support[i] - z, 0.0);
        down += dist.weights[i] * std::max(z - dist.support[i], 0.0);
      }
      return alpha * up - (1.0 - alpha) * down;
    };
    double root = dist.max();
    double below = 0.0;  // P(X <= s_k)
    for (std::size_t k = 0; k < dist.support.size(); ++k) {
      const double hk = h(dist.support[k]);
      if (hk <= 0.0) {
        root = dist.support[k];
        break;
      }
      below += dist.weights[k];
      if (k + 1 < dist.support.size() && h(dist.support[k + 1]) < 0.0) {
        const double slope = alpha * (1.0 - below) + (1.0 - alpha) * below;
        root = std::min(dist.support[k] + hk / slope, dist.support[k + 1]);
        break;
      }
    }
    per_atom[a] = root;
  }
  return broadcast(g, per_atom);
}

RandomVariable conditional_entropic(const RandomVariable& x, const Partition& g, double gamma) {
  require_same_size(x, g);
  if (std::isnan(gamma) || gamma == -std::numeric_limits<double>::infinity())
    throw Error(ErrorCode::InvalidParameter, "gamma must be finite or +infinity");
  if (gamma == std::numeric_limits<double>::infinity()) return ess_sup_conditional(x, g);
  if (gamma == 0.0) return conditional_expectation(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const Distribution dist = conditional_distribution(x, g, a);
    // Shift by the extreme value in the direction of gamma so every exponent is <= 0.
    const double m = gamma > 0.0 ? dist.max() : dist.min();
    double sum = 0.0;
    for (std::size_t i = 0; i < dist.support.size(); ++i)
      sum += dist.weights[i] * std::exp(gamma * (dist.support[i] - m));
    const double value = m + std::log(sum) / gamma;
    if (!std::isfinite(value)) throw Error(ErrorCode::NumericOverflow, "entropic evaluation overflowed");
    per_atom[a] = value;
  }
  return broadcast(g, per_atom);
}

}  // namespace condquant
