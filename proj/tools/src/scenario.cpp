#include "condquant_cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace condquant::cli {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, field + ": " + what);
}

[[noreturn]] void validation_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ValidationError, field + ": " + what);
}

// "name:p1,p2" -> name and numeric parameters.
std::pair<std::string, std::vector<double>> split_tag(const std::string& tag) {
  const auto colon = tag.find(':');
  std::pair<std::string, std::vector<double>> out{tag.substr(0, colon), {}};
  if (colon == std::string::npos) return out;
  std::stringstream rest(tag.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) parse_error("tag '" + tag + "'", "bad parameter '" + item + "'");
    out.second.push_back(value);
  }
  return out;
}

void require_params(const std::string& tag, const std::vector<double>& p, std::size_t lo, std::size_t hi) {
  if (p.size() < lo || p.size() > hi) parse_error("tag '" + tag + "'", "wrong number of parameters");
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) parse_error(where, "missing field '" + key + "'");
  return obj.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_error(where, "expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) parse_error(where, "expected a string");
  return j.get<std::string>();
}

double gamma_value(const json& j, const std::string& where) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    parse_error(where, "expected a number or \"inf\"");
  }
  return number(j, where);
}

std::string label_text(const json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  parse_error(where, "atom labels must be strings or integers");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

SpecEntry parse_spec(const std::string& name, const json& j) {
  const std::string where = "specs." + name;
  SpecEntry e;
  e.name = name;
  const std::string kind = text(field(j, "kind", where), where + ".kind");
  if (kind == "quantile") {
    e.kind = SpecEntry::Kind::Quantile;
    if (j.contains("family")) {
      const std::string tag = text(j.at("family"), where + ".family");
      const auto [fam, p] = split_tag(tag);
      if (fam == "var") {
        require_params(tag, p, 1, 1);
        e.quantile = RiskSpec::var(p[0]);
      } else if (fam == "expectile") {
        require_params(tag, p, 1, 1);
        e.quantile = RiskSpec::expectile(p[0]);
      } else if (fam == "entropic") {
        require_params(tag, p, 1, 1);
        const double alpha = j.contains("alpha") ? number(j.at("alpha"), where + ".alpha") : 0.5;
        e.quantile = RiskSpec::entropic(p[0], alpha);
      } else if (fam == "power") {
        require_params(tag, p, 1, 1);
        e.quantile = RiskSpec::power(number(field(j, "alpha", where), where + ".alpha"), p[0]);
      } else {
        parse_error(where + ".family", "unknown family '" + tag + "'");
      }
    } else {
      const double alpha = number(field(j, "alpha", where), where + ".alpha");
      e.quantile.emplace(alpha, parse_loss_tag(text(field(j, "u1", where), where + ".u1")),
                         parse_loss_tag(text(field(j, "u2", where), where + ".u2")));
    }
    e.alpha_hint = e.quantile->alpha();
  } else if (kind == "shortfall") {
    e.kind = SpecEntry::Kind::Shortfall;
    const std::string tag = text(field(j, "v", where), where + ".v");
    const auto [fam, p] = split_tag(tag);
    if ((fam == "var" || fam == "expectile") && p.size() == 1) e.alpha_hint = p[0];
    e.shortfall.emplace(parse_score_tag(tag));
  } else if (kind == "entropic") {
    e.kind = SpecEntry::Kind::Entropic;
    e.gamma = gamma_value(field(j, "gamma", where), where + ".gamma");
    if (std::isnan(e.gamma)) parse_error(where + ".gamma", "not a number");
  } else {
    parse_error(where + ".kind", "expected quantile, shortfall or entropic");
  }
  return e;
}

}  // namespace

LossFunction parse_loss_tag(const std::string& tag) {
  const auto [fam, p] = split_tag(tag);
  if (fam == "identity") return require_params(tag, p, 0, 0), LossFunction::identity();
  if (fam == "quadratic") return require_params(tag, p, 0, 0), LossFunction::quadratic();
  if (fam == "exp_raw") return require_params(tag, p, 0, 0), LossFunction::exponential_raw();
  if (fam == "power") return require_params(tag, p, 2, 2), LossFunction::power(p[0], p[1]);
  if (fam == "exp") {
    require_params(tag, p, 1, 2);
    return LossFunction::exp_integral(p[0], p.size() == 2 ? std::optional<double>(p[1]) : std::nullopt);
  }
  parse_error("loss tag", "unknown loss '" + tag + "'");
}

ScoreFunction parse_score_tag(const std::string& tag) {
  const auto [fam, p] = split_tag(tag);
  require_params(tag, p, 1, 1);
  if (fam == "var") return ScoreFunction::var(p[0]);
  if (fam == "expectile") return ScoreFunction::expectile(p[0]);
  if (fam == "entropic") return ScoreFunction::entropic(p[0]);
  parse_error("score tag", "unknown score '" + tag + "'");
}

ConditionalRiskMeasure SpecEntry::measure(const SolveSettings& settings) const {
  switch (kind) {
    case Kind::Quantile: return ConditionalRiskMeasure::quantile(*quantile, settings);
    case Kind::Shortfall: return ConditionalRiskMeasure::shortfall(*shortfall, settings);
    case Kind::Entropic: return ConditionalRiskMeasure::entropic_closed_form(gamma);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown spec kind");
}

std::optional<RiskSpec> SpecEntry::loss_pair() const {
  switch (kind) {
    case Kind::Quantile: return quantile;
    case Kind::Shortfall: {
      LossPair pair = losses_from_score(alpha_hint, shortfall->score());
      return RiskSpec(alpha_hint, pair.u1, pair.u2);
    }
    case Kind::Entropic:
      if (std::isfinite(gamma)) return RiskSpec::entropic(gamma);
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<ScoreFunction> SpecEntry::score() const {
  switch (kind) {
    case Kind::Quantile: return quantile->score();
    case Kind::Shortfall: return shortfall->score();
    case Kind::Entropic:
      if (std::isfinite(gamma)) return ScoreFunction::entropic(gamma);
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

template <class Map>
const typename Map::mapped_type& lookup(const Map& m, const std::string& name, const char* what) {
  const auto it = m.find(name);
  if (it == m.end()) throw Error(ErrorCode::ValidationError, std::string("unknown ") + what + " '" + name + "'");
  return it->second;
}

}  // namespace

const RandomVariable& Scenario::variable(const std::string& name) const { return lookup(variables, name, "variable"); }
const Partition& Scenario::partition(const std::string& name) const { return lookup(partitions, name, "partition"); }
const Filtration& Scenario::filtration(const std::string& name) const {
  return lookup(filtrations, name, "filtration");
}
const SpecEntry& Scenario::spec(const std::string& name) const { return lookup(specs, name, "spec"); }

std::string Scenario::partition_name(const Partition& g) const {
  for (const auto& [name, p] : partitions)
    if (p == g) return name;
  return "";
}

Scenario parse_scenario_text(const std::string& body, const std::string& source) {
  json root;
  try {
    root = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                source + ":" + std::to_string(line_of(body, e.byte)) + ": malformed scenario: " + e.what());
  }
  if (!root.is_object()) parse_error(source, "top level must be an object");

  Scenario s;
  s.source = source;
  const json& outcomes = field(root, "outcomes", source);
  if (!outcomes.is_array() || outcomes.empty()) parse_error("outcomes", "expected a non-empty list");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    s.outcomes.push_back(text(outcomes[i], "outcomes[" + std::to_string(i) + "]"));
    if (!seen.insert(s.outcomes.back()).second) validation_error("outcomes", "duplicate '" + s.outcomes.back() + "'");
  }
  const std::size_t n = s.outcomes.size();

  const json& probs = field(root, "probs", source);
  if (!probs.is_array()) parse_error("probs", "expected a list");
  if (probs.size() != n)
    parse_error("probs", "expected " + std::to_string(n) + " entries, found " + std::to_string(probs.size()));
  std::vector<double> p;
  for (std::size_t i = 0; i < n; ++i) p.push_back(number(probs[i], "probs[" + std::to_string(i) + "]"));
  try {
    s.space = make_space(std::move(p));
  } catch (const Error& e) {
    validation_error("probs", e.what());
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[s.outcomes[i]] = i;

  if (root.contains("variables")) {
    for (const auto& [name, values] : root.at("variables").items()) {
      const std::string where = "variables." + name;
      if (!values.is_array()) parse_error(where, "expected a list");
      if (values.size() != n) validation_error(where, "expected " + std::to_string(n) + " values");
      std::vector<double> v;
      for (std::size_t i = 0; i < n; ++i) v.push_back(number(values[i], where + "[" + std::to_string(i) + "]"));
      try {
        s.variables.emplace(name, RandomVariable(std::move(v)));
      } catch (const Error& e) {
        validation_error(where, e.what());
      }
    }
  }

  if (root.contains("partitions")) {
    for (const auto& [name, map] : root.at("partitions").items()) {
      const std::string where = "partitions." + name;
      if (!map.is_object()) parse_error(where, "expected an outcome -> atom label map");
      std::vector<int> labels(n, -1);
      std::map<std::string, int> ids;
      for (const auto& [outcome, label] : map.items()) {
        const auto it = index.find(outcome);
        if (it == index.end()) validation_error(where, "unknown outcome '" + outcome + "'");
        const std::string key = label_text(label, where + "." + outcome);
        labels[it->second] = ids.emplace(key, static_cast<int>(ids.size())).first->second;
      }
      for (std::size_t i = 0; i < n; ++i)
        if (labels[i] < 0) validation_error(where, "outcome '" + s.outcomes[i] + "' has no atom");
      s.partitions.emplace(name, Partition::from_labels(s.space, labels));
    }
  }

  if (root.contains("filtrations")) {
    for (const auto& [name, list] : root.at("filtrations").items()) {
      const std::string where = "filtrations." + name;
      if (!list.is_array()) parse_error(where, "expected a list of partition names");
      std::vector<Partition> stages;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string pname = text(list[i], where + "[" + std::to_string(i) + "]");
        const auto it = s.partitions.find(pname);
        if (it == s.partitions.end()) validation_error(where, "unknown partition '" + pname + "'");
        stages.push_back(it->second);
      }
      try {
        s.filtrations.emplace(name, Filtration(std::move(stages)));
      } catch (const Error& e) {
        validation_error(where, e.what());
      }
    }
  }

  if (root.contains("specs")) {
    for (const auto& [name, spec] : root.at("specs").items()) {
      try {
        s.specs.emplace(name, parse_spec(name, spec));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        validation_error("specs." + name, e.what());
      }
    }
  }
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace condquant::cli
