#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "condquant_cli/commands.hpp"

using namespace condquant;
using namespace condquant::cli;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CONDQUANT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
    std::cerr << "warning: ignoring malformed CONDQUANT_SEED='" << env << "'\n";
  }
  return 42;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional generalized quantiles and shortfall risk on finite scenario spaces"};
  app.require_subcommand(1);

  std::string scenario_path, variable, sigma, filtration, spec;
  double tol_x = SolveSettings{}.tol_x;
  double tol_f = SolveSettings{}.tol_f;
  double grid_step = 0.0;

  auto* compute = app.add_subcommand("compute", "Evaluate a risk spec on a partition or along a filtration");
  compute->add_option("--scenario", scenario_path, "Scenario file")->required();
  compute->add_option("--var", variable, "Variable name")->required();
  auto* sigma_opt = compute->add_option("--sigma", sigma, "Partition name");
  auto* filt_opt = compute->add_option("--filtration", filtration, "Filtration name");
  sigma_opt->excludes(filt_opt);
  compute->add_option("--spec", spec, "Spec name")->required();
  compute->add_option("--tol-x", tol_x, "Bracket width tolerance");
  compute->add_option("--tol-f", tol_f, "Predicate tolerance");
  auto* compute_grid = compute->add_option("--grid-step", grid_step, "Grid step for grid-based routines");

  auto* oracle = app.add_subcommand("oracle", "Compare the solver against per-atom brute force");
  oracle->add_option("--scenario", scenario_path, "Scenario file")->required();
  oracle->add_option("--var", variable, "Variable name")->required();
  oracle->add_option("--sigma", sigma, "Partition name")->required();
  oracle->add_option("--spec", spec, "Spec name")->required();
  oracle->add_option("--grid-step", grid_step, "Brute-force grid step")->required();
  oracle->add_option("--tol-x", tol_x, "Bracket width tolerance");

  VerifyOptions vopts;
  vopts.seed = default_seed();
  std::string report_path;
  auto* verify = app.add_subcommand("verify", "Run property suites over the scenario's specs");
  verify->add_option("--scenario", scenario_path, "Scenario file")->required();
  verify->add_option("--suite", vopts.suite, "axioms, equivalence, foc, consistency or all")
      ->check(CLI::IsMember({"axioms", "equivalence", "foc", "consistency", "all"}));
  verify->add_option("--seed", vopts.seed, "Seed (default from CONDQUANT_SEED, else 42)");
  verify->add_option("--budget", vopts.budget, "Trials per property")->check(CLI::PositiveNumber);
  verify->add_option("--report", report_path, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (compute->parsed() && !sigma_opt->count() && !filt_opt->count()) {
    std::cerr << "compute: one of --sigma or --filtration is required\n";
    return kExitUsage;
  }

  try {
    const Scenario scenario = parse_scenario(scenario_path);
    SolveSettings settings;
    settings.tol_x = tol_x;
    settings.tol_f = tol_f;
    if (grid_step > 0.0 || (compute->parsed() && compute_grid->count())) settings.grid_step = grid_step;
    settings.validate();

    if (verify->parsed()) {
      const VerifyResult result = run_verify(scenario, vopts);
      write_verify_table(std::cout, scenario, vopts, result);
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
          std::cerr << "cannot write report to " << report_path << '\n';
          return kExitUsage;
        }
        write_verify_json(out, scenario, vopts, result);
      }
      return result.exit_code();
    }

    ComputeRequest req;
    req.variable = variable;
    req.spec = spec;
    req.settings = settings;
    if (!sigma.empty()) req.sigma = sigma;
    if (!filtration.empty()) req.filtration = filtration;
    write_table(std::cout, compute->parsed() ? compute_table(scenario, req) : oracle_table(scenario, req));
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
