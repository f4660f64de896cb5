#include "condquant_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "condquant/random.hpp"
#include "json.hpp"

namespace condquant::cli {

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::out_of_range&) {
    // Denormals: stod reports ERANGE but strtod still gives the value.
    v = std::strtod(s.c_str(), nullptr);
    used = s.size();
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  return v;
}

std::optional<std::string> Table::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

std::vector<double> Table::numeric_column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::ParseError, "no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& row : rows) out.push_back(parse_number(row.at(c)));
  return out;
}

void write_table(std::ostream& out, const Table& t) {
  for (const auto& [k, v] : t.meta) out << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "\t" : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
    out << '\n';
  }
}

Table parse_table(std::istream& in) {
  Table t;
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto sep = line.find(": ", 2);
      if (sep == std::string::npos) throw Error(ErrorCode::ParseError, "bad header line: " + line);
      t.meta.emplace_back(line.substr(2, sep - 2), line.substr(sep + 2));
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (!have_columns) {
      t.columns = std::move(cells);
      have_columns = true;
    } else {
      if (cells.size() != t.columns.size()) throw Error(ErrorCode::ParseError, "ragged row: " + line);
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// compute / oracle

namespace {

std::string stage_name(const Scenario& s, const Partition& g, std::size_t t) {
  const std::string name = s.partition_name(g);
  return name.empty() ? "stage" + std::to_string(t) : name;
}

void common_meta(Table& t, const Scenario& s, const ComputeRequest& r, const ConditionalRiskMeasure& m,
                 const char* command) {
  t.meta = {{"command", command}, {"scenario", s.source}, {"variable", r.variable}, {"spec", r.spec}};
  if (r.sigma) t.meta.emplace_back("sigma", *r.sigma);
  if (r.filtration) t.meta.emplace_back("filtration", *r.filtration);
  t.meta.emplace_back("fingerprint", m.fingerprint());
}

}  // namespace

Table compute_table(const Scenario& s, const ComputeRequest& r) {
  if (r.sigma.has_value() == r.filtration.has_value())
    throw Error(ErrorCode::ValidationError, "give exactly one of --sigma and --filtration");
  const RandomVariable& x = s.variable(r.variable);
  const ConditionalRiskMeasure m = s.spec(r.spec).measure(r.settings);
  Table t;
  common_meta(t, s, r, m, "compute");
  if (r.sigma) {
    const RandomVariable rho = m(x, s.partition(*r.sigma));
    t.columns = {"outcome", "value"};
    for (std::size_t i = 0; i < x.size(); ++i) t.rows.push_back({s.outcomes[i], format_number(rho[i])});
    return t;
  }
  const Filtration& f = s.filtration(*r.filtration);
  const auto stages = DynamicRiskMeasure(f, m).evaluate(x);
  t.columns = {"outcome"};
  for (std::size_t k = 0; k < f.stage_count(); ++k) t.columns.push_back(stage_name(s, f.stage(k), k));
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<std::string> row{s.outcomes[i]};
    for (const auto& rho : stages) row.push_back(format_number(rho[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table oracle_table(const Scenario& s, const ComputeRequest& r) {
  if (!r.sigma) throw Error(ErrorCode::ValidationError, "oracle needs --sigma");
  if (!r.settings.grid_step) throw Error(ErrorCode::ValidationError, "oracle needs --grid-step");
  const SpecEntry& entry = s.spec(r.spec);
  const auto pair = entry.loss_pair();
  if (!pair) throw Error(ErrorCode::ValidationError, "spec '" + r.spec + "' has no loss pair for brute force");
  const RandomVariable& x = s.variable(r.variable);
  const Partition& g = s.partition(*r.sigma);
  const ConditionalRiskMeasure m = entry.measure(r.settings);
  const RandomVariable solver = m(x, g);
  const RandomVariable oracle = brute_force_quantile(x, g, *pair, *r.settings.grid_step, r.settings.tol_f);
  Table t;
  common_meta(t, s, r, m, "oracle");
  t.meta.emplace_back("grid_step", format_number(*r.settings.grid_step));
  t.columns = {"outcome", "solver", "oracle", "diff"};
  for (std::size_t i = 0; i < x.size(); ++i)
    t.rows.push_back(
        {s.outcomes[i], format_number(solver[i]), format_number(oracle[i]), format_number(solver[i] - oracle[i])});
  return t;
}

// ---------------------------------------------------------------------------
// Expectations

std::string_view to_string(Expectation e) noexcept {
  switch (e) {
    case Expectation::MustHold: return "must-hold";
    case Expectation::MustFail: return "must-fail";
    case Expectation::Informational: return "info";
  }
  return "?";
}

namespace {

constexpr double kWitnessThreshold = 1e-4;

std::optional<double> entropic_class(const SpecEntry& spec) {
  if (spec.kind == SpecEntry::Kind::Entropic) return spec.gamma;
  const auto v = spec.score();
  return v ? entropic_parameter(*v) : std::nullopt;
}

// v(2x) = c v(x) with one c on both half-lines.
bool homogeneous_score(const ScoreFunction& v) {
  std::optional<double> ratio;
  for (double x : {-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0}) {
    const double a = v(x), b = v(2.0 * x);
    if (a == 0.0) return false;
    const double r = b / a;
    if (ratio && std::abs(r - *ratio) > 1e-9 * std::abs(*ratio)) return false;
    ratio = r;
  }
  return true;
}

bool score_jumps_at_zero(const ScoreFunction& v) {
  return std::abs(v.right_limit(0.0) - v.left_limit(0.0)) > 1e-12;
}

bool strictly_convex_losses(const RiskSpec& spec) {
  const auto grid = linear_grid(0.0, 10.0, 201);
  for (const LossFunction* u : {&spec.u1(), &spec.u2()})
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(u->right_deriv(grid[i]) > u->right_deriv(grid[i - 1]))) return false;
  return true;
}

}  // namespace

Expectation expected_outcome(Property p, const SpecEntry& spec) {
  const auto gamma = entropic_class(spec);
  switch (p) {
    case Property::TowerProperty: return gamma ? Expectation::MustHold : Expectation::MustFail;
    case Property::Supermartingale: return gamma && *gamma >= 0.0 ? Expectation::MustHold : Expectation::MustFail;
    case Property::ConditionalConvexity: {
      if (spec.kind == SpecEntry::Kind::Entropic && std::isinf(spec.gamma)) return Expectation::MustHold;
      const auto pair = spec.loss_pair();
      if (!pair) return Expectation::Informational;
      try {
        if (convexity_condition(*pair)) return Expectation::MustHold;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::MissingSecondDerivative) return Expectation::Informational;
        throw;
      }
      return coherency_hypotheses(*pair) ? Expectation::MustFail : Expectation::Informational;
    }
    case Property::PositiveHomogeneity: {
      if (spec.kind == SpecEntry::Kind::Entropic && std::isinf(spec.gamma)) return Expectation::MustHold;
      const auto v = spec.score();
      if (v && homogeneous_score(*v)) return Expectation::MustHold;
      if (gamma && *gamma != 0.0) return Expectation::MustFail;
      return Expectation::Informational;
    }
    default: return Expectation::MustHold;
  }
}

std::string VerifyRow::status() const {
  switch (expectation) {
    case Expectation::MustHold: return violated ? "FAIL" : "pass";
    case Expectation::MustFail: return witness && witness->magnitude >= kWitnessThreshold ? "witness" : "NO-WITNESS";
    case Expectation::Informational: return violated ? "info:violated" : "info:holds";
  }
  return "?";
}

int VerifyResult::exit_code() const {
  bool missing = false;
  for (const auto& row : rows) {
    const std::string s = row.status();
    if (s == "FAIL") return kExitMustHoldViolated;
    if (s == "NO-WITNESS") missing = true;
  }
  return missing ? kExitWitnessMissing : kExitOk;
}

bool is_suite_name(const std::string& name) {
  return name == "axioms" || name == "equivalence" || name == "foc" || name == "consistency" || name == "all";
}

// ---------------------------------------------------------------------------
// verify

namespace {

struct Sample {
  RandomVariable x;
  Partition g;
};

// Scenario data first, then `count` random instances.
std::vector<Sample> samples(const Scenario& s, const VerifyOptions& o, std::size_t count,
                            std::size_t max_atoms = std::numeric_limits<std::size_t>::max()) {
  std::vector<Sample> out;
  for (const auto& [vn, x] : s.variables)
    for (const auto& [pn, g] : s.partitions)
      if (g.atom_count() <= max_atoms) out.push_back({x, g});
  for (std::size_t trial = 0; trial < count; ++trial) {
    InstanceGenerator gen(o.seed, trial);
    auto space = gen.space(2, 8);
    Partition g = gen.partition(space);
    if (g.atom_count() > max_atoms) continue;
    out.push_back({gen.variable(space->size(), 5.0), std::move(g)});
  }
  return out;
}

VerifyRow from_report(const std::string& suite, const SpecEntry& spec, const PropertyReport& r, Expectation e) {
  VerifyRow row;
  row.suite = suite;
  row.spec = spec.name;
  row.check = std::string(to_string(r.property));
  row.expectation = e;
  row.violated = r.verdict == Verdict::Violated;
  row.magnitude = r.max_violation_magnitude;
  row.tolerance = r.tolerance;
  row.trials = r.trials;
  row.note = r.note;
  row.witness = r.witness;
  return row;
}

SuiteOptions suite_options(const VerifyOptions& o) {
  SuiteOptions opts;
  opts.seed = o.seed;
  opts.trials = o.budget;
  return opts;
}

void equivalence_suite(const Scenario& s, const VerifyOptions& o, const SpecEntry& spec, VerifyResult& out) {
  VerifyRow row;
  row.suite = "equivalence";
  row.spec = spec.name;
  const SolveSettings settings;
  if (spec.kind == SpecEntry::Kind::Entropic) {
    if (!std::isfinite(spec.gamma)) return;
    row.check = "closed_form_vs_shortfall";
    row.tolerance = 1e-9;
    const ShortfallSpec sf(ScoreFunction::entropic(spec.gamma));
    for (const auto& [x, g] : samples(s, o, o.budget)) {
      const RandomVariable a = conditional_entropic(x, g, spec.gamma), b = conditional_shortfall(x, g, sf, settings);
      for (std::size_t i = 0; i < x.size(); ++i) row.magnitude = std::max(row.magnitude, std::abs(a[i] - b[i]));
      ++row.trials;
    }
  } else {
    row.check = "quantile_vs_shortfall";
    row.tolerance = score_jumps_at_zero(*spec.score()) ? 1e-8 : 2.0 * settings.tol_x;
    for (const auto& [x, g] : samples(s, o, o.budget)) {
      const EquivalenceReport r =
          spec.kind == SpecEntry::Kind::Quantile
              ? equivalence_check(x, g, *spec.quantile, settings)
              : reverse_equivalence_check(x, g, spec.shortfall->score(), spec.alpha_hint, settings);
      row.magnitude = std::max(row.magnitude, r.max_discrepancy);
      ++row.trials;
    }
  }
  row.violated = row.magnitude > row.tolerance;
  out.rows.push_back(std::move(row));
}

VerifyRow foc_row(const SpecEntry& spec, const char* check) {
  VerifyRow row;
  row.suite = "foc";
  row.spec = spec.name;
  row.check = check;
  return row;
}

void foc_suite(const Scenario& s, const VerifyOptions& o, const SpecEntry& spec, VerifyResult& out) {
  const auto pair = spec.loss_pair();
  if (!pair) return;
  const SolveSettings settings;

  VerifyRow sound = foc_row(spec, "foc_at_solution");
  sound.tolerance = 1e-8;
  VerifyRow perturbed = foc_row(spec, "foc_rejects_perturbation");
  perturbed.expectation = strictly_convex_losses(*pair) ? Expectation::MustHold : Expectation::Informational;
  perturbed.tolerance = 0.05;
  std::size_t rejected = 0;
  std::size_t trial = 0;
  for (const auto& [x, g] : samples(s, o, o.budget)) {
    const RandomVariable z = conditional_generalized_quantile(x, g, *pair, settings);
    for (std::size_t a = 0; a < g.atom_count(); ++a) {
      const FocResiduals r = foc_residuals(conditional_distribution(x, g, a), z[g.atom(a).front()], *pair);
      sound.magnitude = std::max({sound.magnitude, r.upper, -r.lower});
    }
    InstanceGenerator gen(o.seed ^ 0x9e3779b97f4a7c15ull, trial++);
    const std::size_t atom = gen.index(g.atom_count());
    std::vector<double> shifted(z.values().begin(), z.values().end());
    for (std::size_t i : g.atom(atom)) shifted[i] += 0.05;
    if (!foc_check(x, RandomVariable(std::move(shifted)), g, *pair, 1e-8)) ++rejected;
    ++sound.trials;
  }
  sound.violated = sound.magnitude > sound.tolerance;
  perturbed.trials = sound.trials;
  perturbed.magnitude = 1.0 - static_cast<double>(rejected) / static_cast<double>(std::max<std::size_t>(1, trial));
  perturbed.violated = perturbed.magnitude > perturbed.tolerance;
  perturbed.note = "magnitude is the share of perturbed decisions that still pass";
  out.rows.push_back(std::move(sound));
  out.rows.push_back(std::move(perturbed));

  VerifyRow brute = foc_row(spec, "brute_force_oracle");
  brute.tolerance = 1e-9;
  brute.note = "magnitude is max |solver - oracle| - grid_step";
  for (const auto& [x, g] : samples(s, o, std::min<std::size_t>(o.budget, 200))) {
    const double step = 1e-3 * std::max(x.max() - x.min(), 1.0);
    const RandomVariable a = conditional_generalized_quantile(x, g, *pair, settings);
    const RandomVariable b = brute_force_quantile(x, g, *pair, step);
    for (std::size_t i = 0; i < x.size(); ++i) brute.magnitude = std::max(brute.magnitude, std::abs(a[i] - b[i]) - step);
    ++brute.trials;
  }
  brute.violated = brute.magnitude > brute.tolerance;
  out.rows.push_back(std::move(brute));

  VerifyRow joint = foc_row(spec, "separability");
  joint.tolerance = 0.0;
  joint.note = "joint product-grid search vs per-atom grid search, at most 3 atoms";
  for (const auto& [x, g] : samples(s, o, std::min<std::size_t>(o.budget, 100), 3)) {
    const auto grid = linear_grid(x.min(), x.max() > x.min() ? x.max() : x.min() + 1.0, 40);
    const RandomVariable a = joint_brute_force(x, g, *pair, grid), b = grid_quantile(x, g, *pair, grid);
    for (std::size_t i = 0; i < x.size(); ++i) joint.magnitude = std::max(joint.magnitude, std::abs(a[i] - b[i]));
    ++joint.trials;
  }
  joint.violated = joint.magnitude > joint.tolerance;
  out.rows.push_back(std::move(joint));
}

void axioms_suite(const VerifyOptions& o, const SpecEntry& spec, VerifyResult& out) {
  const ConditionalRiskMeasure m = spec.measure();
  const SuiteOptions opts = suite_options(o);
  auto add = [&](const PropertyReport& r) { out.rows.push_back(from_report("axioms", spec, r, expected_outcome(r.property, spec))); };
  add(check_monotonicity(m, opts));
  add(check_translation_invariance(m, opts));
  add(check_normalization(m, opts));
  if (spec.kind == SpecEntry::Kind::Quantile) {
    const double a = spec.quantile->alpha();
    add(check_monotone_alpha(*spec.quantile, spec.quantile->with_alpha(a + 0.5 * (1.0 - a)), {}, opts));
  }
  add(check_conditional_convexity(m, opts));
  add(check_positive_homogeneity(m, opts));
  SuiteOptions cont = opts;
  cont.trials = std::min<std::size_t>(o.budget, 50);
  add(check_continuity_from_below(m, cont));
}

void consistency_suite(const VerifyOptions& o, const SpecEntry& spec, VerifyResult& out) {
  const ConditionalRiskMeasure m = spec.measure();
  SuiteOptions opts = suite_options(o);
  auto add = [&](const PropertyReport& r) {
    out.rows.push_back(from_report("consistency", spec, r, expected_outcome(r.property, spec)));
  };
  add(check_sequential_consistency(m, opts));
  SuiteOptions tower = opts;
  tower.tol = 1e-9;
  add(check_tower_property(m, tower));
  add(check_supermartingale(m, opts));
}

nlohmann::json rounded(double x) {
  if (!std::isfinite(x)) return format_number(x);
  return parse_number(format_number(x));
}

nlohmann::json values_json(const RandomVariable& v) {
  auto arr = nlohmann::json::array();
  for (double x : v.values()) arr.push_back(rounded(x));
  return arr;
}

std::string values_text(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s + "]";
}

std::string witness_text(const Witness& w) {
  std::string s = "magnitude=" + format_number(w.magnitude) + " probs=" + values_text(w.probs) + " partitions=[";
  for (std::size_t k = 0; k < w.partitions.size(); ++k) {
    s += k ? ";" : "";
    for (std::size_t i = 0; i < w.partitions[k].size(); ++i) s += (i ? "," : "") + std::to_string(w.partitions[k][i]);
  }
  s += "] x=" + values_text(w.x.values());
  if (w.y) s += " y=" + values_text(w.y->values());
  if (w.lambda) s += " lambda=" + values_text(w.lambda->values());
  if (w.partitions.size() > 1)
    s += " stage=" + std::to_string(w.stage) + " stage_from=" + std::to_string(w.stage_from) +
         " direction=" + std::to_string(w.direction);
  return s;
}

}  // namespace

VerifyResult run_verify(const Scenario& s, const VerifyOptions& o) {
  if (!is_suite_name(o.suite)) throw Error(ErrorCode::ValidationError, "unknown suite '" + o.suite + "'");
  VerifyResult out;
  const bool all = o.suite == "all";
  for (const auto& [name, spec] : s.specs) {
    if (all || o.suite == "equivalence") equivalence_suite(s, o, spec, out);
    if (all || o.suite == "foc") foc_suite(s, o, spec, out);
    if (all || o.suite == "axioms") axioms_suite(o, spec, out);
    if (all || o.suite == "consistency") consistency_suite(o, spec, out);
  }
  return out;
}

void write_verify_table(std::ostream& out, const Scenario& s, const VerifyOptions& o, const VerifyResult& r) {
  Table t;
  t.meta = {{"command", "verify"},
            {"scenario", s.source},
            {"suite", o.suite},
            {"seed", std::to_string(o.seed)},
            {"budget", std::to_string(o.budget)}};
  for (const auto& [name, spec] : s.specs) t.meta.emplace_back("spec " + name, spec.measure().fingerprint());
  t.columns = {"suite", "spec", "check", "expect", "status", "magnitude", "tolerance", "trials"};
  for (const auto& row : r.rows)
    t.rows.push_back({row.suite, row.spec, row.check, std::string(to_string(row.expectation)), row.status(),
                      format_number(row.magnitude), format_number(row.tolerance), std::to_string(row.trials)});
  write_table(out, t);
  for (const auto& row : r.rows)
    if (row.witness && row.violated)
      out << "# witness " << row.spec << "/" << row.check << ": " << witness_text(*row.witness) << '\n';
  out << "# exit_code: " << r.exit_code() << '\n';
}

void write_verify_json(std::ostream& out, const Scenario& s, const VerifyOptions& o, const VerifyResult& r) {
  nlohmann::json j;
  j["command"] = "verify";
  j["scenario"] = s.source;
  j["suite"] = o.suite;
  j["seed"] = o.seed;
  j["budget"] = o.budget;
  for (const auto& [name, spec] : s.specs) j["fingerprints"][name] = spec.measure().fingerprint();
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr{{"suite", row.suite},
                      {"spec", row.spec},
                      {"check", row.check},
                      {"expect", std::string(to_string(row.expectation))},
                      {"status", row.status()},
                      {"magnitude", rounded(row.magnitude)},
                      {"tolerance", rounded(row.tolerance)},
                      {"trials", row.trials}};
    if (!row.note.empty()) jr["note"] = row.note;
    if (row.witness) {
      const Witness& w = *row.witness;
      nlohmann::json jw;
      jw["magnitude"] = rounded(w.magnitude);
      jw["probs"] = nlohmann::json::array();
      for (double p : w.probs) jw["probs"].push_back(rounded(p));
      jw["partitions"] = w.partitions;
      jw["x"] = values_json(w.x);
      if (w.y) jw["y"] = values_json(*w.y);
      if (w.lambda) jw["lambda"] = values_json(*w.lambda);
      jw["stage"] = w.stage;
      jw["stage_from"] = w.stage_from;
      jw["direction"] = w.direction;
      jr["witness"] = jw;
    }
    j["rows"].push_back(jr);
  }
  j["exit_code"] = r.exit_code();
  out << j.dump(2) << '\n';
}

}  // namespace condquant::cli
