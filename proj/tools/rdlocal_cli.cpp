#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rdlocal/cli.hpp"

namespace {

struct SubArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string survey_weights;  // "", "on", "off"
};

void add_common(CLI::App* sub, SubArgs* args) {
  sub->add_option("--config", args->config, "run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args->out, "output directory (default: out)");
  sub->add_option("--survey-weights", args->survey_weights,
                  "override use of expansion weights in estimation")
      ->check(CLI::IsMember({"on", "off"}));
}

rdlocal::CliOverrides to_overrides(const SubArgs& args) {
  rdlocal::CliOverrides ov;
  ov.seed = args.seed;
  if (args.survey_weights == "on") ov.survey_weights = true;
  if (args.survey_weights == "off") ov.survey_weights = false;
  return ov;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local polynomial estimation of discontinuity and kink designs"};
  app.require_subcommand(1);

  SubArgs ingest_args, estimate_args, simulate_args, plot_args;
  CLI::App* ingest = app.add_subcommand("ingest", "survey file to canonical datasets");
  add_common(ingest, &ingest_args);
  CLI::App* estimate =
      app.add_subcommand("estimate", "run the configured estimation grid");
  add_common(estimate, &estimate_args);
  CLI::App* simulate = app.add_subcommand("simulate", "monte carlo study");
  add_common(simulate, &simulate_args);
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      simulate->add_option("--seed", seed_value, "override the simulation seed");
  CLI::App* plot = app.add_subcommand("plotdata", "binned means and fitted curves");
  add_common(plot, &plot_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 returns 0 for --help; anything else is a usage problem.
    return code == 0 ? 0 : 2;
  }

  const SubArgs* args = nullptr;
  int (*run)(const rdlocal::RunConfig&, const std::string&,
             const rdlocal::CliOverrides&, std::ostream&, std::ostream&) = nullptr;

  if (*ingest) {
    args = &ingest_args;
  } else if (*estimate) {
    args = &estimate_args;
    run = &rdlocal::cmd_estimate;
  } else if (*simulate) {
    args = &simulate_args;
    run = &rdlocal::cmd_simulate;
  } else {
    args = &plot_args;
    run = &rdlocal::cmd_plotdata;
  }

  rdlocal::RunConfig config;
  try {
    config = rdlocal::load_run_config(args->config);
  } catch (const rdlocal::error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  rdlocal::CliOverrides overrides = to_overrides(*args);
  if (*simulate && seed_opt->count() > 0) overrides.seed = seed_value;

  if (*ingest) return rdlocal::cmd_ingest(config, args->out);
  return run(config, args->out, overrides, std::cout, std::cerr);
}
