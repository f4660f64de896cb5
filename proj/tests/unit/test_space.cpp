#include <numeric>

#include "test_support.hpp"

using namespace condquant;
using namespace testing_support;

TEST(Space, MakeValidates) {
  EXPECT_EQ(make_space({1.0 / 3, 1.0 / 3, 1.0 / 3})->size(), 3u);
  EXPECT_EQ(make_space({1.0})->size(), 1u);
  EXPECT_CQ_ERROR(make_space({0.5, 0.6}), ErrorCode::ProbabilitiesDoNotSumToOne);
  EXPECT_CQ_ERROR(make_space({}), ErrorCode::EmptySpace);
  EXPECT_CQ_ERROR(make_space({1.0, 0.0}), ErrorCode::NonPositiveProbability);
  EXPECT_CQ_ERROR(make_space({1.5, -0.5}), ErrorCode::NonPositiveProbability);
}

TEST(Space, RandomVariableRejectsNonFinite) {
  EXPECT_CQ_ERROR(RandomVariable({1.0, std::nan("")}), ErrorCode::NonFiniteValue);
  EXPECT_CQ_ERROR(rv({1, 2}) + rv({1, 2, 3}), ErrorCode::SpaceMismatch);
}

TEST(Space, PartitionAtomsAreCanonical) {
  auto s = uniform(4);
  const Partition p = labels(s, {7, 3, 7, 3});
  ASSERT_EQ(p.atom_count(), 2u);
  EXPECT_EQ(p.atom_of(0), 0u);
  EXPECT_EQ(p.atom_of(1), 1u);
  EXPECT_EQ(std::vector<std::size_t>(p.atom(0).begin(), p.atom(0).end()), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(p, Partition::from_atoms(s, {{3, 1}, {2, 0}}));
  EXPECT_DOUBLE_EQ(p.atom_probability(1), 0.5);
  EXPECT_CQ_ERROR(p.atom(2), ErrorCode::UnknownAtom);
  EXPECT_CQ_ERROR(Partition::from_atoms(s, {{0, 1}, {1, 2, 3}}), ErrorCode::InvalidPartition);
  EXPECT_CQ_ERROR(Partition::from_atoms(s, {{0, 1}, {2}}), ErrorCode::InvalidPartition);
}

TEST(Space, RefinesExamples) {
  ThreePoint t;
  EXPECT_TRUE(refines(t.full, t.trivial));
  EXPECT_FALSE(refines(t.trivial, t.full));
  EXPECT_FALSE(refines(labels(t.space, {0, 0, 1}), labels(t.space, {0, 1, 0})));
  EXPECT_TRUE(refines(t.g, t.g));
  EXPECT_TRUE(refines(t.g, Partition::trivial(uniform(3))));  // equal spaces compare by value
  EXPECT_CQ_ERROR(refines(t.g, Partition::trivial(make_space({0.5, 0.25, 0.25}))), ErrorCode::SpaceMismatch);
}

namespace {

// Every set partition of {0..n-1}, as restricted growth strings.
std::vector<Partition> all_partitions(const SpacePtr& s) {
  const std::size_t n = s->size();
  std::vector<Partition> out;
  std::vector<int> a(n, 0), maxes(n, 0);
  while (true) {
    out.push_back(Partition::from_labels(s, a));
    std::size_t i = n - 1;
    while (i > 0 && a[i] == maxes[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    maxes[i] = std::max(maxes[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      maxes[j] = maxes[i];
    }
  }
  return out;
}

}  // namespace

TEST(Space, RefinesIsAPartialOrderExhaustively) {
  for (std::size_t n = 1; n <= 6; ++n) {
    auto s = uniform(n);
    const auto parts = all_partitions(s);
    const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203};
    ASSERT_EQ(parts.size(), bell[n]);
    std::vector<std::vector<char>> r(parts.size(), std::vector<char>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = 0; j < parts.size(); ++j) r[i][j] = refines(parts[i], parts[j]);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      EXPECT_TRUE(r[i][i]);
      for (std::size_t j = 0; j < parts.size(); ++j) {
        if (i != j) EXPECT_FALSE(r[i][j] && r[j][i]) << "n=" << n;
        if (!r[i][j]) continue;
        for (std::size_t k = 0; k < parts.size(); ++k)
          if (r[j][k]) EXPECT_TRUE(r[i][k]);
      }
    }
  }
}

TEST(Space, Measurability) {
  ThreePoint t;
  EXPECT_TRUE(is_measurable(rv({1, 1, 3}), t.g));
  EXPECT_FALSE(is_measurable(t.x, t.trivial));
  EXPECT_TRUE(is_measurable(rv({-4, 0.5, 9}), t.full));
  EXPECT_TRUE(is_measurable(rv({1, 1 + 1e-13, 3}), t.g, 1e-12));
}

TEST(Space, ConditionalDistribution) {
  ThreePoint t;
  const Distribution d = conditional_distribution(t.x, t.g, 0);
  EXPECT_EQ(d.support, (std::vector<double>{1, 2}));
  EXPECT_NEAR(d.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(d.weights[1], 0.5, 1e-15);
  const Distribution tail = conditional_distribution(t.x, t.g, 1);
  EXPECT_EQ(tail.support, (std::vector<double>{3}));
  EXPECT_EQ(tail.weights, (std::vector<double>{1}));
  const Distribution flat = conditional_distribution(rv({4, 4, 1}), t.g, 0);
  EXPECT_EQ(flat.support, (std::vector<double>{4}));
  EXPECT_CQ_ERROR(conditional_distribution(t.x, t.g, 2), ErrorCode::UnknownAtom);
}

TEST(Space, ConditionalExpectationAndSup) {
  ThreePoint t;
  EXPECT_LT(max_abs_diff(conditional_expectation(t.x, t.g), rv({1.5, 1.5, 3})), 1e-15);
  EXPECT_LT(max_abs_diff(conditional_expectation(t.x, t.trivial), rv({2, 2, 2})), 1e-15);
  EXPECT_EQ(conditional_expectation(rv({2, 2, -1}), t.g), rv({2, 2, -1}));
  EXPECT_EQ(ess_sup_conditional(t.x, t.g), rv({2, 2, 3}));
  EXPECT_EQ(ess_sup_conditional(t.x, t.trivial), rv({3, 3, 3}));
  EXPECT_EQ(ess_sup_conditional(rv({5, 5, 5}), t.g), rv({5, 5, 5}));
}

TEST(Space, ConditioningProperties) {
  for (std::size_t trial = 0; trial < 300; ++trial) {
    InstanceGenerator gen(7, trial);
    auto s = gen.space(1, 8);
    const Partition g = gen.partition(s);
    const RandomVariable x = gen.variable(s->size(), 5.0);
    const RandomVariable e = conditional_expectation(x, g);
    EXPECT_TRUE(is_measurable(e, g));
    EXPECT_NEAR(expectation(e, *s), expectation(x, *s), 1e-12);
    for (std::size_t a = 0; a < g.atom_count(); ++a) {
      const Distribution d = conditional_distribution(x, g, a);
      EXPECT_NEAR(std::accumulate(d.weights.begin(), d.weights.end(), 0.0), 1.0, 1e-12);
      EXPECT_TRUE(std::is_sorted(d.support.begin(), d.support.end()));
    }
  }
}

TEST(Space, FiltrationValidation) {
  ThreePoint t;
  EXPECT_EQ(Filtration({t.trivial, t.g, t.full}).stage_count(), 3u);
  EXPECT_CQ_ERROR(Filtration({t.g, t.full}), ErrorCode::InvalidFiltration);
  EXPECT_CQ_ERROR(Filtration({t.trivial, t.g}), ErrorCode::InvalidFiltration);
  EXPECT_CQ_ERROR(Filtration({t.trivial, t.g, labels(t.space, {0, 1, 1}), t.full}), ErrorCode::InvalidFiltration);
  EXPECT_CQ_ERROR(Filtration({}), ErrorCode::InvalidFiltration);
}

TEST(Space, GeneratedFiltrationsHaveIntermediateStage) {
  for (std::size_t trial = 0; trial < 200; ++trial) {
    InstanceGenerator gen(3, trial);
    auto s = gen.space(3, 8);
    EXPECT_GE(gen.filtration(s).stage_count(), 3u);
  }
}

TEST(Space, GeneratorIsDeterministic) {
  InstanceGenerator a(11, 5), b(11, 5), c(11, 6);
  const double u = a.uniform(0, 1);
  EXPECT_EQ(u, b.uniform(0, 1));
  EXPECT_NE(u, c.uniform(0, 1));
}
