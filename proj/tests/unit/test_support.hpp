#pragma once

#include <gtest/gtest.h>

#include <initializer_list>
#include <vector>

#include "condquant/dynamic.hpp"
#include "condquant/random.hpp"

#define EXPECT_CQ_ERROR(stmt, expected_code)                                     \
  do {                                                                           \
    try {                                                                        \
      stmt;                                                                      \
      ADD_FAILURE() << "expected " << condquant::to_string(expected_code);       \
    } catch (const condquant::Error& e) {                                        \
      EXPECT_EQ(e.code(), expected_code) << e.what();                            \
    }                                                                            \
  } while (0)

namespace testing_support {

inline condquant::RandomVariable rv(std::initializer_list<double> v) {
  return condquant::RandomVariable(std::vector<double>(v));
}

inline condquant::SpacePtr uniform(std::size_t n) {
  return condquant::make_space(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

inline condquant::Partition labels(const condquant::SpacePtr& s, std::initializer_list<int> l) {
  const std::vector<int> v(l);
  return condquant::Partition::from_labels(s, v);
}

// The three-outcome running example: uniform thirds, X = (1, 2, 3).
struct ThreePoint {
  condquant::SpacePtr space = uniform(3);
  condquant::RandomVariable x = rv({1, 2, 3});
  condquant::Partition g = labels(space, {0, 0, 1});
  condquant::Partition trivial = condquant::Partition::trivial(space);
  condquant::Partition full = condquant::Partition::discrete(space);
};

// alpha = 1/3, u1 = x^2, u2 with right derivative e^x.
inline condquant::RiskSpec example_spec() {
  return {1.0 / 3.0, condquant::LossFunction::quadratic(), condquant::LossFunction::exp_integral(1.0, 1.0)};
}

inline double max_abs_diff(const condquant::RandomVariable& a, const condquant::RandomVariable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing_support
