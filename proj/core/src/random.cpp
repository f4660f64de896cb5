#include "condquant/random.hpp"

#include <algorithm>
#include <numeric>

namespace condquant {

InstanceGenerator::InstanceGenerator(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32), 0x5eedu};
  engine_.seed(seq);
}

double InstanceGenerator::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::size_t InstanceGenerator::index(std::size_t count) {
  return static_cast<std::size_t>(engine_() % count);
}

SpacePtr InstanceGenerator::space(std::size_t min_outcomes, std::size_t max_outcomes) {
  const std::size_t n = min_outcomes + index(max_outcomes - min_outcomes + 1);
  std::vector<double> w(n);
  for (auto& x : w) x = uniform(0.05, 1.0);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  // Push any residual rounding into the largest weight.
  const double residual = 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
  *std::max_element(w.begin(), w.end()) += residual;
  return make_space(std::move(w));
}

Partition InstanceGenerator::partition(const SpacePtr& space) {
  const std::size_t n = space->size();
  const std::size_t k = 1 + index(n);
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(index(k));
  return Partition::from_labels(space, labels);
}

Filtration InstanceGenerator::filtration(const SpacePtr& space) {
  const std::size_t n = space->size();
  std::vector<std::vector<std::size_t>> atoms(n);
  for (std::size_t i = 0; i < n; ++i) atoms[i] = {i};
  std::vector<Partition> chain{Partition::from_atoms(space, atoms)};
  while (atoms.size() > 1) {
    // Leave at least two atoms on the first merge so an intermediate stage exists.
    const std::size_t max_merges = atoms.size() == 2 || chain.size() > 1 ? atoms.size() - 1 : atoms.size() - 2;
    const std::size_t merges = 1 + index(max_merges);
    for (std::size_t m = 0; m < merges && atoms.size() > 1; ++m) {
      const std::size_t a = index(atoms.size());
      std::size_t b = index(atoms.size() - 1);
      if (b >= a) ++b;
      atoms[a].insert(atoms[a].end(), atoms[b].begin(), atoms[b].end());
      atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(b));
    }
    chain.push_back(Partition::from_atoms(space, atoms));
  }
  std::reverse(chain.begin(), chain.end());
  return Filtration(std::move(chain));
}

RandomVariable InstanceGenerator::variable(std::size_t n, double range) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(-range, range);
  return RandomVariable(std::move(v));
}

RandomVariable InstanceGenerator::measurable(const Partition& g, double lo, double hi) {
  std::vector<double> per_atom(g.atom_count());
  for (auto& x : per_atom) x = uniform(lo, hi);
  return broadcast(g, per_atom);
}

}  // namespace condquant
