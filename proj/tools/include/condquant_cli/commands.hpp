#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "condquant_cli/scenario.hpp"

namespace condquant::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitMustHoldViolated = 1,
  kExitWitnessMissing = 2,
  kExitUsage = 64,
  kExitInput = 65,
};

/// 12 significant digits; negative zero prints as 0.
std::string format_number(double x);
double parse_number(const std::string& s);

/// Tab-separated table with "# key: value" header lines.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::string> meta_value(const std::string& key) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

void write_table(std::ostream& out, const Table& t);
Table parse_table(std::istream& in);

struct ComputeRequest {
  std::string variable;
  std::optional<std::string> sigma;
  std::optional<std::string> filtration;
  std::string spec;
  SolveSettings settings;
};

Table compute_table(const Scenario& s, const ComputeRequest& r);
/// Solver and per-atom brute force side by side; needs settings.grid_step.
Table oracle_table(const Scenario& s, const ComputeRequest& r);

enum class Expectation { MustHold, MustFail, Informational };
std::string_view to_string(Expectation e) noexcept;

/// What the verify command demands of a spec for each property.
Expectation expected_outcome(Property p, const SpecEntry& spec);

struct VerifyOptions {
  std::string suite = "all";
  std::uint64_t seed = 42;
  std::size_t budget = 500;
};

struct VerifyRow {
  std::string suite;
  std::string spec;
  std::string check;
  Expectation expectation = Expectation::MustHold;
  bool violated = false;
  double magnitude = 0.0;
  double tolerance = 0.0;
  std::size_t trials = 0;
  std::string note;
  std::optional<Witness> witness;

  /// pass, FAIL, witness, NO-WITNESS or info.
  std::string status() const;
};

struct VerifyResult {
  std::vector<VerifyRow> rows;
  int exit_code() const;
};

bool is_suite_name(const std::string& name);
VerifyResult run_verify(const Scenario& s, const VerifyOptions& o);
void write_verify_table(std::ostream& out, const Scenario& s, const VerifyOptions& o, const VerifyResult& r);
void write_verify_json(std::ostream& out, const Scenario& s, const VerifyOptions& o, const VerifyResult& r);

}  // namespace condquant::cli
