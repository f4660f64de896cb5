#include "condquant/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "condquant/error.hpp"

namespace condquant {

void SolveSettings::validate() const {
  if (!(tol_x > 0.0) || !(tol_f > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerances must be positive");
  if (max_iter < 1) throw Error(ErrorCode::InvalidParameter, "max_iter must be at least 1");
  if (grid_step && !(*grid_step > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid_step must be positive");
}

double SolveSettings::grid_step_for(double data_range) const {
  if (grid_step) return *grid_step;
  return data_range > 0.0 ? 1e-4 * data_range : 1e-4;
}

std::string SolveSettings::str() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "tol_x=%.12g tol_f=%.12g max_iter=%d", tol_x, tol_f, max_iter);
  std::string s = buf;
  if (grid_step) {
    std::snprintf(buf, sizeof buf, " grid_step=%.12g", *grid_step);
    s += buf;
  }
  return s;
}

double leftmost_nonpositive(const std::function<double(double)>& g, std::span<const double> support,
                            const SolveSettings& settings, SolveTrace* trace) {
  settings.validate();
  if (support.empty()) throw Error(ErrorCode::BracketFailure, "empty support");
  auto eval = [&](double x) {
    const double value = g(x);
    if (std::isnan(value)) throw Error(ErrorCode::BracketFailure, "score evaluates to NaN");
    if (trace) trace->points.emplace_back(x, value);
    return value;
  };

  double lo = support.front();
  double hi = support.back();
  if (lo == hi) return lo;

  if (eval(hi) > settings.tol_f) throw Error(ErrorCode::BracketFailure, "g(max support) > 0; the score is not admissible");
  if (eval(lo) <= settings.tol_f) {
    if (eval(lo - settings.tol_x) > settings.tol_f) return lo;
    // Only reachable for scores that vanish on part of (0, inf).
    double width = std::max(hi - lo, 1.0);
    hi = lo;
    lo -= width;
    int expansions = 0;
    while (eval(lo) <= settings.tol_f) {
      if (++expansions > 60) throw Error(ErrorCode::BracketFailure, "g stays non-positive to the left of the support");
      hi = lo;
      width *= 2.0;
      lo -= width;
    }
  }

  int iterations = 0;
  while (hi - lo > settings.tol_x) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (++iterations > settings.max_iter)
      throw Error(ErrorCode::MaxIterExceeded, "bisection did not reach tol_x within max_iter");
    if (eval(mid) <= settings.tol_f) hi = mid;
    else lo = mid;
  }

  for (double s : support) {
    if (s > hi) break;
    if (s > lo && eval(s) <= settings.tol_f) return s;
  }
  return hi;
}

}  // namespace condquant
