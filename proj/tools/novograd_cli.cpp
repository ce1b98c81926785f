#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "novograd/cli/commands.hpp"

namespace {

void add_config_flags(CLI::App* cmd, novograd::cli::CliOptions& opts, bool with_format) {
  cmd->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.sets, "Override a config key, KEY=VALUE with dotted KEY (repeatable)");
  cmd->add_option_function<std::string>("--out", [&](const std::string& v) { opts.out_dir = v; }, "Output directory");
  cmd->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { opts.seed = v; }, "Run seed");
  if (with_format)
    cmd->add_option_function<std::string>("--format", [&](const std::string& v) { opts.format = v; },
                                           "Trajectory format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = novograd::cli;
  CLI::App app{"NovoGrad optimizer experiments"};
  app.require_subcommand(1);

  cli::CliOptions run_opts, cmp_opts, sweep_opts;
  auto* run = app.add_subcommand("run", "Train one configuration and write its trajectory");
  add_config_flags(run, run_opts, true);
  auto* cmp = app.add_subcommand("compare", "Train several optimizers on one problem");
  add_config_flags(cmp, cmp_opts, true);
  auto* sweep = app.add_subcommand("sweep", "Sweep the base learning rate");
  add_config_flags(sweep, sweep_opts, false);

  std::string problem;
  std::uint64_t gc_seed = 0;
  std::size_t trials = 100;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gc->add_option("--problem", problem, "quadratic, rosenbrock, logreg or mlp")->required();
  gc->add_option("--seed", gc_seed, "Seed for the random draws");
  gc->add_option("--trials", trials, "Number of random draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  if (*run) return cli::cmd_run(run_opts, std::cout, std::cerr);
  if (*cmp) return cli::cmd_compare(cmp_opts, std::cout, std::cerr);
  if (*sweep) return cli::cmd_sweep(sweep_opts, std::cout, std::cerr);
  return cli::cmd_gradcheck(problem, gc_seed, trials, std::cout, std::cerr);
}
