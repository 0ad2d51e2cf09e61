#include <iostream>

#include <CLI11.hpp>

#include "grating/commands.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Volume integral equation solver for dielectric diffraction gratings (TM mode)"};
  app.require_subcommand(1);

  std::string config;
  auto *solve = app.add_subcommand("solve", "solve one configuration and write efficiencies");
  solve->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);

  std::string sweep_config;
  std::string parameter = "k";
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
  auto *sweep = app.add_subcommand("sweep", "repeat the solve over a parameter range");
  sweep->add_option("config", sweep_config, "configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", parameter, "k or theta (degrees)")
      ->check(CLI::IsMember({"k", "theta"}));
  sweep->add_option("--from", from, "first parameter value")->required();
  sweep->add_option("--to", to, "last parameter value")->required();
  sweep->add_option("--steps", steps, "number of points")->required()->check(CLI::PositiveNumber);

  std::string diag_config;
  auto *diagnose = app.add_subcommand("diagnose", "report solvability diagnostics of the contrast");
  diagnose->add_option("config", diag_config, "configuration file")->required()->check(CLI::ExistingFile);

  std::string level = "quick";
  auto *validate = app.add_subcommand("validate", "run the oracle gate suite");
  validate->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : grating::kExitInvalid;
  }

  if (*solve) {
    return grating::cmd_solve(config, std::cerr);
  }
  if (*sweep) {
    return grating::cmd_sweep(sweep_config, parameter, from, to, steps, std::cerr);
  }
  if (*diagnose) {
    return grating::cmd_diagnose(diag_config, std::cerr);
  }
  return grating::cmd_validate(level, std::cout);
}
