#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace condquant {

struct SolveSettings {
  double tol_x = 1e-10;
  double tol_f = 1e-12;
  int max_iter = 200;
  /// Oracle grid resolution; unset means 1e-4 times the data range.
  std::optional<double> grid_step;

  void validate() const;
  double grid_step_for(double data_range) const;
  std::string str() const;
};

/// Every (x, g(x)) pair visited, in visiting order.
struct SolveTrace {
  std::vector<std::pair<double, double>> points;
};

/// Smallest x with g(x) <= tol_f for a non-increasing g, bracketed by the
/// sorted support. A support point inside the final bracket that satisfies
/// the predicate is returned exactly, so jump points of g come out exact.
///
/// Throws BracketFailure when g(max support) > tol_f or when g never turns
/// positive to the left, and MaxIterExceeded past settings.max_iter.
double leftmost_nonpositive(const std::function<double(double)>& g, std::span<const double> support,
                            const SolveSettings& settings, SolveTrace* trace = nullptr);

}  // namespace condquant
