#include "condquant/space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace condquant {

SpacePtr ProbabilitySpace::make(std::vector<double> probs) {
  if (probs.empty()) throw Error(ErrorCode::EmptySpace, "probability list is empty");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] <= 0.0)
      throw Error(ErrorCode::NonPositiveProbability, "outcome " + std::to_string(i) + " has weight " +
                                                         std::to_string(probs[i]));
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > kSumTolerance)
    throw Error(ErrorCode::ProbabilitiesDoNotSumToOne, "weights sum to " + std::to_string(total));
  return std::shared_ptr<const ProbabilitySpace>(new ProbabilitySpace(std::move(probs)));
}

RandomVariable::RandomVariable(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "random variable has a non-finite value");
}

double RandomVariable::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RandomVariable::max() const { return *std::max_element(values_.begin(), values_.end()); }

namespace {

template <class Op>
RandomVariable zip(const RandomVariable& a, const RandomVariable& b, Op op) {
  if (a.size() != b.size()) throw Error(ErrorCode::SpaceMismatch, "random variables differ in length");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return RandomVariable(std::move(out));
}

template <class Op>
RandomVariable map(const RandomVariable& a, Op op) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i]);
  return RandomVariable(std::move(out));
}

}  // namespace

RandomVariable operator+(const RandomVariable& a, const RandomVariable& b) {
  return zip(a, b, std::plus<>{});
}
RandomVariable operator-(const RandomVariable& a, const RandomVariable& b) {
  return zip(a, b, std::minus<>{});
}
RandomVariable operator*(const RandomVariable& a, const RandomVariable& b) {
  return zip(a, b, std::multiplies<>{});
}
RandomVariable operator+(const RandomVariable& a, double c) {
  return map(a, [c](double x) { return x + c; });
}
RandomVariable operator-(const RandomVariable& a, double c) {
  return map(a, [c](double x) { return x - c; });
}
RandomVariable operator*(double c, const RandomVariable& a) {
  return map(a, [c](double x) { return c * x; });
}

Partition::Partition(SpacePtr space, std::vector<std::size_t> atom_of)
    : space_(std::move(space)), atom_of_(std::move(atom_of)) {
  std::size_t count = 0;
  for (std::size_t id : atom_of_) count = std::max(count, id + 1);
  atoms_.resize(count);
  for (std::size_t i = 0; i < atom_of_.size(); ++i) atoms_[atom_of_[i]].push_back(i);
}

Partition Partition::from_labels(SpacePtr space, std::span<const int> labels) {
  if (!space) throw Error(ErrorCode::InvalidPartition, "partition without a space");
  if (labels.size() != space->size())
    throw Error(ErrorCode::SpaceMismatch, "partition labels do not cover the outcome set");
  // First appearance order equals ordering by smallest outcome index.
  std::map<int, std::size_t> canonical;
  std::vector<std::size_t> atom_of(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = canonical.try_emplace(labels[i], canonical.size());
    atom_of[i] = it->second;
  }
  return Partition(std::move(space), std::move(atom_of));
}

Partition Partition::from_atoms(SpacePtr space, const std::vector<std::vector<std::size_t>>& atoms) {
  if (!space) throw Error(ErrorCode::InvalidPartition, "partition without a space");
  const std::size_t n = space->size();
  std::vector<int> labels(n, -1);
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    if (atoms[a].empty()) throw Error(ErrorCode::InvalidPartition, "empty atom");
    for (std::size_t outcome : atoms[a]) {
      if (outcome >= n) throw Error(ErrorCode::InvalidPartition, "atom references unknown outcome");
      if (labels[outcome] != -1) throw Error(ErrorCode::InvalidPartition, "atoms overlap");
      labels[outcome] = static_cast<int>(a);
    }
  }
  if (std::find(labels.begin(), labels.end(), -1) != labels.end())
    throw Error(ErrorCode::InvalidPartition, "atoms do not cover the outcome set");
  return from_labels(std::move(space), labels);
}

Partition Partition::trivial(SpacePtr space) {
  const std::vector<int> labels(space->size(), 0);
  return from_labels(std::move(space), labels);
}

Partition Partition::discrete(SpacePtr space) {
  std::vector<int> labels(space->size());
  std::iota(labels.begin(), labels.end(), 0);
  return from_labels(std::move(space), labels);
}

std::span<const std::size_t> Partition::atom(std::size_t id) const {
  if (id >= atoms_.size()) throw Error(ErrorCode::UnknownAtom, "atom id " + std::to_string(id));
  return atoms_[id];
}

double Partition::atom_probability(std::size_t id) const {
  double p = 0.0;
  for (std::size_t outcome : atom(id)) p += space_->prob(outcome);
  return p;
}

bool Partition::same_space(const Partition& other) const noexcept {
  return space_ == other.space_ || *space_ == *other.space_;
}

bool Partition::operator==(const Partition& other) const noexcept {
  return same_space(other) && atom_of_ == other.atom_of_;
}

double Distribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) m += support[i] * weights[i];
  return m;
}

Distribution Distribution::canonical(std::vector<double> values, std::vector<double> weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Distribution d;
  for (std::size_t idx : order) {
    if (!d.support.empty() && d.support.back() == values[idx]) {
      d.weights.back() += weights[idx];
    } else {
      d.support.push_back(values[idx]);
      d.weights.push_back(weights[idx]);
    }
  }
  return d;
}

Filtration::Filtration(std::vector<Partition> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw Error(ErrorCode::InvalidFiltration, "filtration has no stages");
  if (stages_.front().atom_count() != 1)
    throw Error(ErrorCode::InvalidFiltration, "first stage must be the trivial partition");
  if (stages_.back().atom_count() != stages_.back().outcome_count())
    throw Error(ErrorCode::InvalidFiltration, "last stage must be the discrete partition");
  for (std::size_t t = 1; t < stages_.size(); ++t) {
    if (!stages_[t].same_space(stages_[0])) throw Error(ErrorCode::SpaceMismatch, "stages on different spaces");
    if (!refines(stages_[t], stages_[t - 1]))
      throw Error(ErrorCode::InvalidFiltration, "stage " + std::to_string(t) + " does not refine its predecessor");
  }
}

bool refines(const Partition& fine, const Partition& coarse) {
  if (!fine.same_space(coarse)) throw Error(ErrorCode::SpaceMismatch, "partitions live on different spaces");
  for (const auto& atom : fine.atoms()) {
    const std::size_t target = coarse.atom_of(atom.front());
    for (std::size_t outcome : atom)
      if (coarse.atom_of(outcome) != target) return false;
  }
  return true;
}

void require_same_size(const RandomVariable& x, const Partition& g) {
  if (x.size() != g.outcome_count())
    throw Error(ErrorCode::SpaceMismatch, "random variable has " + std::to_string(x.size()) +
                                              " values, partition has " + std::to_string(g.outcome_count()) +
                                              " outcomes");
}

bool is_measurable(const RandomVariable& z, const Partition& g, double tol) {
  require_same_size(z, g);
  for (const auto& atom : g.atoms()) {
    const double ref = z[atom.front()];
    for (std::size_t outcome : atom)
      if (std::abs(z[outcome] - ref) > tol) return false;
  }
  return true;
}

Distribution conditional_distribution(const RandomVariable& x, const Partition& g, std::size_t atom_id) {
  require_same_size(x, g);
  const auto atom = g.atom(atom_id);
  const double mass = g.atom_probability(atom_id);
  std::vector<double> values, weights;
  values.reserve(atom.size());
  weights.reserve(atom.size());
  for (std::size_t outcome : atom) {
    values.push_back(x[outcome]);
    weights.push_back(g.space().prob(outcome) / mass);
  }
  return Distribution::canonical(std::move(values), std::move(weights));
}

RandomVariable broadcast(const Partition& g, std::span<const double> per_atom) {
  if (per_atom.size() != g.atom_count()) throw Error(ErrorCode::SpaceMismatch, "one value per atom expected");
  std::vector<double> out(g.outcome_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = per_atom[g.atom_of(i)];
  return RandomVariable(std::move(out));
}

RandomVariable conditional_expectation(const RandomVariable& x, const Partition& g) {
  require_same_size(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    double num = 0.0, mass = 0.0;
    for (std::size_t outcome : g.atom(a)) {
      num += g.space().prob(outcome) * x[outcome];
      mass += g.space().prob(outcome);
    }
    per_atom[a] = num / mass;
  }
  return broadcast(g, per_atom);
}

RandomVariable ess_sup_conditional(const RandomVariable& x, const Partition& g) {
  require_same_size(x, g);
  std::vector<double> per_atom(g.atom_count());
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    double m = x[g.atom(a).front()];
    for (std::size_t outcome : g.atom(a)) m = std::max(m, x[outcome]);
    per_atom[a] = m;
  }
  return broadcast(g, per_atom);
}

double expectation(const RandomVariable& x, const ProbabilitySpace& space) {
  if (x.size() != space.size()) throw Error(ErrorCode::SpaceMismatch, "random variable and space differ in size");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m += space.prob(i) * x[i];
  return m;
}

}  // namespace condquant
