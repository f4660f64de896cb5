#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condquant/dynamic.hpp"

namespace condquant::cli {

LossFunction parse_loss_tag(const std::string& tag);
/// "var:alpha", "expectile:alpha" or "entropic:gamma".
ScoreFunction parse_score_tag(const std::string& tag);

struct SpecEntry {
  enum class Kind { Quantile, Shortfall, Entropic };

  std::string name;
  Kind kind = Kind::Quantile;
  std::optional<RiskSpec> quantile;
  std::optional<ShortfallSpec> shortfall;
  /// Confidence level used when a shortfall score is turned back into a loss pair.
  double alpha_hint = 0.5;
  double gamma = 0.0;

  ConditionalRiskMeasure measure(const SolveSettings& settings = {}) const;
  /// The loss pair behind the measure, when one exists.
  std::optional<RiskSpec> loss_pair() const;
  std::optional<ScoreFunction> score() const;
};

struct Scenario {
  std::string source;
  std::vector<std::string> outcomes;
  SpacePtr space;
  std::map<std::string, RandomVariable> variables;
  std::map<std::string, Partition> partitions;
  std::map<std::string, Filtration> filtrations;
  std::map<std::string, SpecEntry> specs;

  const RandomVariable& variable(const std::string& name) const;
  const Partition& partition(const std::string& name) const;
  const Filtration& filtration(const std::string& name) const;
  const SpecEntry& spec(const std::string& name) const;
  /// Name of a partition equal to g, or "" if none.
  std::string partition_name(const Partition& g) const;
};

/// Throws Error(ParseError) for malformed text or missing fields and
/// Error(ValidationError) when the content breaks a structural rule.
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<memory>");
Scenario parse_scenario(const std::string& path);

}  // namespace condquant::cli
