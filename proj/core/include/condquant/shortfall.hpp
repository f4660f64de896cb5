#pragma once

#include <string>

#include "condquant/loss.hpp"
#include "condquant/quantile.hpp"
#include "condquant/solver.hpp"
#include "condquant/space.hpp"

namespace condquant {

/// Acceptance-set measure: smallest G-measurable Z with E[v(X - Z) | G] <= 0.
class ShortfallSpec {
 public:
  /// Throws ValidationError if v fails the score-class grid checks.
  explicit ShortfallSpec(ScoreFunction v);

  const ScoreFunction& score() const noexcept { return v_; }
  std::string fingerprint() const;

 private:
  ScoreFunction v_;
};

double static_shortfall(const Distribution& dist, const ScoreFunction& v, const SolveSettings& settings = {},
                        SolveTrace* trace = nullptr);

RandomVariable conditional_shortfall(const RandomVariable& x, const Partition& g, const ShortfallSpec& spec,
                                     const SolveSettings& settings = {});

struct EquivalenceReport {
  RandomVariable quantile;
  RandomVariable shortfall;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Generalized quantile versus the shortfall of its derived score; passes when
/// the largest per-outcome gap is at most 2 * tol_x.
EquivalenceReport equivalence_check(const RandomVariable& x, const Partition& g, const RiskSpec& qspec,
                                    const SolveSettings& settings = {});

/// Starts from a score: integrates it into a loss pair at `alpha` and compares
/// the induced generalized quantile with the shortfall of v.
EquivalenceReport reverse_equivalence_check(const RandomVariable& x, const Partition& g, const ScoreFunction& v,
                                            double alpha, const SolveSettings& settings = {});

/// Per atom, the smallest support value z with P(X <= z | atom) >= alpha.
RandomVariable conditional_var(const RandomVariable& x, const Partition& g, double alpha);

/// Per atom, the root of alpha E[(X-z)^+] = (1-alpha) E[(z-X)^+], solved
/// exactly on the piecewise-linear segments.
RandomVariable conditional_expectile(const RandomVariable& x, const Partition& g, double alpha,
                                     const SolveSettings& settings = {});

/// (1/gamma) log E[exp(gamma X) | G], with E[X|G] at gamma = 0 and the
/// conditional ess-sup at gamma = +infinity.
RandomVariable conditional_entropic(const RandomVariable& x, const Partition& g, double gamma);

}  // namespace condquant
