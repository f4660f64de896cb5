#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "condquant/error.hpp"

namespace condquant {

/// Finite outcome set with strictly positive probabilities.
class ProbabilitySpace {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Validates and wraps the weights. Zero-probability outcomes are rejected.
  static std::shared_ptr<const ProbabilitySpace> make(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double prob(std::size_t outcome) const { return probs_.at(outcome); }
  std::span<const double> probs() const noexcept { return probs_; }

  bool operator==(const ProbabilitySpace& other) const noexcept { return probs_ == other.probs_; }

 private:
  explicit ProbabilitySpace(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

using SpacePtr = std::shared_ptr<const ProbabilitySpace>;

inline SpacePtr make_space(std::vector<double> probs) { return ProbabilitySpace::make(std::move(probs)); }

/// A real value per outcome. Positive values are losses.
class RandomVariable {
 public:
  RandomVariable() = default;
  explicit RandomVariable(std::vector<double> values);
  static RandomVariable constant(std::size_t n, double c) { return RandomVariable(std::vector<double>(n, c)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double at(std::size_t i) const { return values_.at(i); }
  std::span<const double> values() const noexcept { return values_; }
  double min() const;
  double max() const;

  friend RandomVariable operator+(const RandomVariable& a, const RandomVariable& b);
  friend RandomVariable operator-(const RandomVariable& a, const RandomVariable& b);
  friend RandomVariable operator*(const RandomVariable& a, const RandomVariable& b);
  friend RandomVariable operator+(const RandomVariable& a, double c);
  friend RandomVariable operator-(const RandomVariable& a, double c);
  friend RandomVariable operator*(double c, const RandomVariable& a);

  bool operator==(const RandomVariable&) const = default;

 private:
  std::vector<double> values_;
};

/// Sub-sigma-algebra given by a partition of the outcomes. Atoms are ordered
/// by their smallest outcome index, and outcomes inside an atom are sorted.
class Partition {
 public:
  /// Any labelling of outcomes; equal labels share an atom.
  static Partition from_labels(SpacePtr space, std::span<const int> labels);
  static Partition from_atoms(SpacePtr space, const std::vector<std::vector<std::size_t>>& atoms);
  static Partition trivial(SpacePtr space);
  static Partition discrete(SpacePtr space);

  const ProbabilitySpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  std::size_t outcome_count() const noexcept { return atom_of_.size(); }
  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t atom_of(std::size_t outcome) const { return atom_of_.at(outcome); }
  std::span<const std::size_t> atom(std::size_t id) const;
  const std::vector<std::vector<std::size_t>>& atoms() const noexcept { return atoms_; }
  std::span<const std::size_t> labels() const noexcept { return atom_of_; }
  double atom_probability(std::size_t id) const;

  bool same_space(const Partition& other) const noexcept;
  bool operator==(const Partition& other) const noexcept;

 private:
  Partition(SpacePtr space, std::vector<std::size_t> atom_of);
  SpacePtr space_;
  std::vector<std::size_t> atom_of_;
  std::vector<std::vector<std::size_t>> atoms_;
};

/// Finite distribution with strictly increasing support.
struct Distribution {
  std::vector<double> support;
  std::vector<double> weights;

  /// Sorts, merges equal support points, and drops nothing.
  static Distribution canonical(std::vector<double> values, std::vector<double> weights);
  static Distribution point_mass(double c) { return {{c}, {1.0}}; }

  double min() const { return support.front(); }
  double max() const { return support.back(); }
  double mean() const;
};

/// Refining sequence of partitions from {Omega} to singletons.
class Filtration {
 public:
  explicit Filtration(std::vector<Partition> stages);

  std::size_t stage_count() const noexcept { return stages_.size(); }
  const Partition& stage(std::size_t t) const { return stages_.at(t); }
  const std::vector<Partition>& stages() const noexcept { return stages_; }
  const ProbabilitySpace& space() const noexcept { return stages_.front().space(); }

 private:
  std::vector<Partition> stages_;
};

bool refines(const Partition& fine, const Partition& coarse);
bool is_measurable(const RandomVariable& z, const Partition& g, double tol = 0.0);

Distribution conditional_distribution(const RandomVariable& x, const Partition& g, std::size_t atom);
RandomVariable conditional_expectation(const RandomVariable& x, const Partition& g);
RandomVariable ess_sup_conditional(const RandomVariable& x, const Partition& g);

double expectation(const RandomVariable& x, const ProbabilitySpace& space);

/// Builds a G-measurable variable from one value per atom.
RandomVariable broadcast(const Partition& g, std::span<const double> per_atom);

void require_same_size(const RandomVariable& x, const Partition& g);

}  // namespace condquant
