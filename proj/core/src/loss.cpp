#include "condquant/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace condquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_param(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", p);
  return buf;
}

double one_sided_step(double x) { return 1e-9 * std::max(1.0, std::abs(x)); }

// Slope index for piecewise-linear tables: segment i spans [xs[i], xs[i+1]].
struct Table {
  std::vector<double> xs;
  std::vector<double> ys;

  double slope(std::size_t i) const { return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]); }

  double interpolate(double x, bool extrapolate) const {
    if (x <= xs.front()) return extrapolate ? ys.front() + slope(0) * (x - xs.front()) : ys.front();
    if (x >= xs.back())
      return extrapolate ? ys.back() + slope(xs.size() - 2) * (x - xs.back()) : ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    return ys[i] + slope(i) * (x - xs[i]);
  }

  // Slope of the segment to the left (left == true) or right of x.
  double segment_slope(double x, bool left) const {
    const auto it = left ? std::lower_bound(xs.begin(), xs.end(), x) : std::upper_bound(xs.begin(), xs.end(), x);
    std::ptrdiff_t i = (it - xs.begin()) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(xs.size()) - 2);
    return slope(static_cast<std::size_t>(i));
  }
};

Table make_table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error(ErrorCode::InvalidParameter, "table needs at least two (x, y) pairs of equal length");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw Error(ErrorCode::InvalidParameter, "table abscissae must be strictly increasing");
  for (double y : ys)
    if (!std::isfinite(y)) throw Error(ErrorCode::NonFiniteValue, "table value is not finite");
  return {std::move(xs), std::move(ys)};
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) throw Error(ErrorCode::ScoreNotIntegrable, "integrand is not finite");
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    // Jumps never converge in the error estimate; bottoming out at depth 0 leaves
    // an interval of width 2^-48 of the original, well below the tolerance.
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::string FamilyTag::str() const {
  std::string s = name;
  for (std::size_t i = 0; i < params.size(); ++i) s += (i == 0 ? ":" : ",") + format_param(params[i]);
  return s;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0,1), got " + format_param(alpha));
}

// ---------------------------------------------------------------------------
// LossFunction

LossFunction::LossFunction(Parts parts) : parts_(std::make_shared<const Parts>(std::move(parts))) {}

LossFunction LossFunction::identity() {
  return LossFunction({[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 1.0; }, 0.0,
                       {"identity", {}}});
}

LossFunction LossFunction::power(double a, double beta) {
  if (!(a > 0.0) || !(beta >= 1.0))
    throw Error(ErrorCode::InvalidParameter, "power loss needs a > 0 and beta >= 1");
  if (beta == 1.0) return identity().scaled(a);
  auto deriv = [a, beta](double x) { return a * beta * std::pow(x, beta - 1.0); };
  std::optional<double> second;
  if (beta == 2.0) second = 2.0 * a;
  else if (beta > 2.0) second = 0.0;
  else second = kInf;
  return LossFunction({[a, beta](double x) { return a * std::pow(x, beta); }, deriv, deriv, second,
                       {"power", {a, beta}}});
}

LossFunction LossFunction::quadratic() {
  auto deriv = [](double x) { return 2.0 * x; };
  return LossFunction({[](double x) { return x * x; }, deriv, deriv, 2.0, {"quadratic", {}}});
}

LossFunction LossFunction::exp_integral(double gamma, std::optional<double> scale) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidParameter, "exp_integral needs gamma > 0");
  const double c = scale.value_or(gamma / std::expm1(gamma));
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidParameter, "exp_integral needs a positive scale");
  auto deriv = [gamma, c](double x) { return c * std::exp(gamma * x); };
  return LossFunction({[gamma, c](double x) { return c * std::expm1(gamma * x) / gamma; }, deriv, deriv, c * gamma,
                       {"exp", {gamma, c}}});
}

LossFunction LossFunction::exponential_raw() {
  auto e = [](double x) { return std::exp(x); };
  return LossFunction({e, e, e, 1.0, {"exp_raw", {}}});
}

LossFunction LossFunction::tabulated(std::vector<double> xs, std::vector<double> us) {
  auto table = std::make_shared<const Table>(make_table(std::move(xs), std::move(us)));
  return LossFunction({[table](double x) { return table->interpolate(x, true); },
                       [table](double x) { return table->segment_slope(x, true); },
                       [table](double x) { return table->segment_slope(x, false); }, std::nullopt,
                       {"tabulated", {}}});
}

LossFunction LossFunction::scaled(double c) const {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidParameter, "loss scale must be positive");
  if (c == 1.0) return *this;
  auto base = parts_;
  std::optional<double> second;
  if (base->second_deriv_at_zero) second = c * *base->second_deriv_at_zero;
  FamilyTag tag = base->family;
  tag.name = "scaled(" + tag.str() + ")";
  tag.params = {c};
  return LossFunction({[base, c](double x) { return c * base->eval(x); },
                       [base, c](double x) { return c * base->left_deriv(x); },
                       [base, c](double x) { return c * base->right_deriv(x); }, second, tag});
}

LossFunction LossFunction::shifted_to_origin() const {
  const double offset = parts_->eval(0.0);
  if (offset == 0.0) return *this;
  auto base = parts_;
  FamilyTag tag = base->family;
  tag.name = "origin(" + tag.str() + ")";
  tag.params = {};
  return LossFunction({[base, offset](double x) { return base->eval(x) - offset; }, base->left_deriv,
                       base->right_deriv, base->second_deriv_at_zero, tag});
}

// ---------------------------------------------------------------------------
// ScoreFunction

ScoreFunction::ScoreFunction(Parts parts)
    : parts_(std::make_shared<const Parts>(std::move(parts))),
      source_(std::make_shared<const std::optional<LossSource>>()) {}

double ScoreFunction::left_limit(double x) const {
  return parts_->left_limit ? parts_->left_limit(x) : parts_->eval(x - one_sided_step(x));
}

double ScoreFunction::right_limit(double x) const {
  return parts_->right_limit ? parts_->right_limit(x) : parts_->eval(x + one_sided_step(x));
}

ScoreFunction ScoreFunction::var(double alpha) {
  require_alpha(alpha);
  return ScoreFunction({[alpha](double x) { return x > 0.0 ? alpha : alpha - 1.0; },
                        [alpha](double x) { return x > 0.0 ? alpha : alpha - 1.0; },
                        [alpha](double x) { return x >= 0.0 ? alpha : alpha - 1.0; },
                        {"var", {alpha}}});
}

ScoreFunction ScoreFunction::expectile(double alpha) {
  require_alpha(alpha);
  auto v = [alpha](double x) { return x > 0.0 ? alpha * x : (1.0 - alpha) * x; };
  return ScoreFunction({v, v, v, {"expectile", {alpha}}});
}

ScoreFunction ScoreFunction::entropic(double gamma) {
  if (!std::isfinite(gamma)) throw Error(ErrorCode::InvalidParameter, "entropic score needs a finite gamma");
  Fn v;
  if (gamma > 0.0) v = [gamma](double x) { return std::expm1(gamma * x); };
  else if (gamma < 0.0) v = [gamma](double x) { return -std::expm1(gamma * x); };
  else v = [](double x) { return x; };
  return ScoreFunction({v, v, v, {"entropic", {gamma}}});
}

ScoreFunction ScoreFunction::from_losses(double alpha, const LossFunction& u1, const LossFunction& u2) {
  require_alpha(alpha);
  auto eval = [alpha, u1, u2](double x) {
    return x > 0.0 ? alpha * u1.left_deriv(x) : -(1.0 - alpha) * u2.right_deriv(-x);
  };
  // Right limit uses the opposite one-sided derivatives.
  auto right = [alpha, u1, u2](double x) {
    return x >= 0.0 ? alpha * u1.right_deriv(x) : -(1.0 - alpha) * u2.left_deriv(-x);
  };
  ScoreFunction s({eval, eval, right, {"from_losses(" + u1.family().str() + ";" + u2.family().str() + ")", {alpha}}});
  s.source_ = std::make_shared<const std::optional<LossSource>>(LossSource{alpha, u1, u2});
  return s;
}

ScoreFunction ScoreFunction::tabulated(std::vector<double> xs, std::vector<double> vs) {
  auto table = std::make_shared<const Table>(make_table(std::move(xs), std::move(vs)));
  // Linear interpolation is continuous, so both one-sided limits are the value itself.
  auto eval = [table](double x) { return table->interpolate(x, false); };
  return ScoreFunction({eval, eval, eval, {"tabulated", {}}});
}

ScoreFunction ScoreFunction::shifted(double eps) const {
  auto base = *this;
  FamilyTag tag{"shifted(" + family().str() + ")", {eps}};
  return ScoreFunction({[base, eps](double x) { return base(x - eps); },
                        [base, eps](double x) { return base.left_limit(x - eps); },
                        [base, eps](double x) { return base.right_limit(x - eps); }, tag});
}

ScoreFunction score_from_losses(double alpha, const LossFunction& u1, const LossFunction& u2) {
  return ScoreFunction::from_losses(alpha, u1, u2);
}

// ---------------------------------------------------------------------------
// losses_from_score

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  if (!std::isfinite(whole)) throw Error(ErrorCode::ScoreNotIntegrable, "integrand is not finite");
  return simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, 48);
}

namespace {

LossPair normalize(LossFunction u1, LossFunction u2) {
  const double n1 = u1(1.0), n2 = u2(1.0);
  if (!(n1 > 0.0)) throw Error(ErrorCode::DegenerateScore, "integral of v over [0,1] is not positive");
  if (!(n2 > 0.0)) throw Error(ErrorCode::DegenerateScore, "integral of v over [-1,0] is not negative");
  LossFunction u1n = u1.scaled(1.0 / n1);
  LossFunction u2n = u2.scaled(1.0 / n2);
  return {std::move(u1), std::move(u2), std::move(u1n), std::move(u2n)};
}

LossPair entropic_losses(double alpha, double gamma) {
  if (gamma == 0.0) {
    return normalize(LossFunction::quadratic().scaled(0.5 / alpha), LossFunction::quadratic().scaled(0.5 / (1.0 - alpha)));
  }
  const double s = gamma > 0.0 ? 1.0 : -1.0;
  const double c1 = s / alpha, c2 = s / (1.0 - alpha);
  auto d1 = [gamma, c1](double x) { return c1 * std::expm1(gamma * x); };
  auto d2 = [gamma, c2](double x) { return -c2 * std::expm1(-gamma * x); };
  LossFunction u1({[gamma, c1](double x) { return c1 * (std::expm1(gamma * x) - gamma * x) / gamma; }, d1, d1,
                   c1 * gamma, {"entropic_u1", {gamma, alpha}}});
  LossFunction u2({[gamma, c2](double x) { return c2 * (x + std::expm1(-gamma * x) / gamma); }, d2, d2, c2 * gamma,
                   {"entropic_u2", {gamma, alpha}}});
  return normalize(std::move(u1), std::move(u2));
}

LossPair quadrature_losses(double alpha, const ScoreFunction& v) {
  auto u1_eval = [alpha, v](double x) { return adaptive_simpson([&v](double t) { return v(t); }, 0.0, x) / alpha; };
  auto u2_eval = [alpha, v](double x) {
    return -adaptive_simpson([&v](double t) { return v(t); }, -x, 0.0) / (1.0 - alpha);
  };
  // u1'(x-) = v(x-)/alpha; u2'(x+) = -v((-x)-)/(1-alpha); u2'(x-) = -v((-x)+)/(1-alpha).
  LossFunction u1({u1_eval, [alpha, v](double x) { return v.left_limit(x) / alpha; },
                   [alpha, v](double x) { return v.right_limit(x) / alpha; }, std::nullopt,
                   {"integral_u1(" + v.family().str() + ")", {alpha}}});
  LossFunction u2({u2_eval, [alpha, v](double x) { return -v.right_limit(-x) / (1.0 - alpha); },
                   [alpha, v](double x) { return -v.left_limit(-x) / (1.0 - alpha); }, std::nullopt,
                   {"integral_u2(" + v.family().str() + ")", {alpha}}});
  // Probe integrability on the unit interval before handing the pair out.
  u1(1.0);
  u2(1.0);
  return normalize(std::move(u1), std::move(u2));
}

}  // namespace

LossPair losses_from_score(double alpha, const ScoreFunction& v) {
  require_alpha(alpha);
  const FamilyTag& tag = v.family();
  if (tag.name == "var") {
    const double a = tag.params.at(0);
    return normalize(LossFunction::identity().scaled(a / alpha), LossFunction::identity().scaled((1.0 - a) / (1.0 - alpha)));
  }
  if (tag.name == "expectile") {
    const double a = tag.params.at(0);
    return normalize(LossFunction::quadratic().scaled(0.5 * a / alpha),
                     LossFunction::quadratic().scaled(0.5 * (1.0 - a) / (1.0 - alpha)));
  }
  if (tag.name == "entropic") return entropic_losses(alpha, tag.params.at(0));
  if (const auto& src = v.source()) {
    return normalize(src->u1.scaled(src->alpha / alpha),
                     src->u2.shifted_to_origin().scaled((1.0 - src->alpha) / (1.0 - alpha)));
  }
  return quadrature_losses(alpha, v);
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::violates(std::string_view condition) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.condition == condition; });
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2) return {lo};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  grid.back() = hi;
  return grid;
}

ValidationReport validate_loss(const LossFunction& u, std::span<const double> grid) {
  ValidationReport report;
  auto add = [&report](std::string condition, std::string detail) {
    if (!report.violates(condition)) report.violations.push_back({std::move(condition), std::move(detail)});
  };
  const double tol = 1e-12;
  if (std::abs(u(0.0)) > tol) add("zero_at_origin", "u(0) = " + format_param(u(0.0)));
  if (std::abs(u(1.0) - 1.0) > tol) add("unit_at_one", "u(1) = " + format_param(u(1.0)));

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = u(grid[i]);
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(values[i] > values[i - 1])) add("strictly_increasing", "u is not increasing at x = " + format_param(grid[i]));
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double w = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
    const double chord = (1.0 - w) * values[i - 1] + w * values[i + 1];
    const double scale = std::max({1.0, std::abs(values[i - 1]), std::abs(values[i + 1])});
    if (values[i] > chord + 1e-12 * scale) add("convex", "midpoint test fails at x = " + format_param(grid[i]));
  }
  double prev_left = 0.0, prev_right = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double l = u.left_deriv(x), r = u.right_deriv(x);
    const double scale = std::max(1.0, std::abs(r));
    if (l < -tol || l > r + 1e-12 * scale) add("derivative_order", "0 <= u'_- <= u'_+ fails at x = " + format_param(x));
    if (i > 0 && (l < prev_left - 1e-12 * scale || r < prev_right - 1e-12 * scale))
      add("derivative_monotone", "derivatives decrease at x = " + format_param(x));
    prev_left = l;
    prev_right = r;
  }
  return report;
}

ValidationReport validate_score(const ScoreFunction& v, std::span<const double> grid) {
  ValidationReport report;
  auto add = [&report](std::string condition, std::string detail) {
    if (!report.violates(condition)) report.violations.push_back({std::move(condition), std::move(detail)});
  };
  double prev = -kInf;
  for (double x : grid) {
    const double value = v(x);
    const double tol = 1e-12 * std::max(1.0, std::abs(value));
    if (value < prev - tol) add("non_decreasing", "v decreases at x = " + format_param(x));
    if (x < 0.0 && value > tol) add("sign_left_of_zero", "v(" + format_param(x) + ") = " + format_param(value) + " > 0");
    if (x > 0.0 && value < -tol)
      add("sign_right_of_zero", "v(" + format_param(x) + ") = " + format_param(value) + " < 0");
    prev = value;
  }
  return report;
}

}  // namespace condquant
