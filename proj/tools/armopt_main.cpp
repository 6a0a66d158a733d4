#include <iostream>

#include <CLI11.hpp>

#include "armopt/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Energy-optimal trajectory planning for a planar 3R arm"};
  app.require_subcommand(1);

  armopt::RunConfig config;
  std::string out_dir = ".";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", config.scenario,
                    "no-obstacles | static-obstacles | moving-obstacles | all "
                    "| file:<path>")
        ->capture_default_str();
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    cmd->add_option("--set", config.overrides,
                    "solver override key=value (repeatable)");
    cmd->add_flag("!--no-trace", config.emit_trace, "skip trace CSV emission");
  };

  add_common(app.add_subcommand("simulate", "evaluate the unoptimized baseline"));
  add_common(app.add_subcommand("optimize", "run the full energy optimization"));
  add_common(app.add_subcommand("validate", "check scenario feasibility"));

  CLI11_PARSE(app, argc, argv);

  config.command = app.get_subcommands().front()->get_name();
  config.out_dir = out_dir;
  return armopt::cli_run(config, std::cout, std::cerr);
}
