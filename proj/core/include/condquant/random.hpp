#pragma once

#include <cstdint>
#include <random>

#include "condquant/space.hpp"

namespace condquant {

/// Per-trial generator. Each (seed, trial) pair gets its own engine, so suites
/// give the same instances regardless of evaluation order. Uniform draws use
/// the top 53 bits of the engine directly to stay identical across standard
/// libraries.
class InstanceGenerator {
 public:
  InstanceGenerator(std::uint64_t seed, std::uint64_t trial);

  double uniform(double lo, double hi);
  std::size_t index(std::size_t count);  // uniform in [0, count)

  /// n uniform in [min_outcomes, max_outcomes]; weights are normalized draws from [0.05, 1].
  SpacePtr space(std::size_t min_outcomes, std::size_t max_outcomes);
  Partition partition(const SpacePtr& space);
  /// Built by merging random atoms of the discrete partition until one atom
  /// remains; at least 3 stages whenever the space has 3 or more outcomes.
  Filtration filtration(const SpacePtr& space);
  RandomVariable variable(std::size_t n, double range);
  /// One draw per atom in [lo, hi], broadcast over the atom.
  RandomVariable measurable(const Partition& g, double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace condquant
