#include <iostream>

#include <CLI11.hpp>

#include "wkam/cli/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Weak KAM experiments: critical values, barriers, viscous and stochastic checks"};
  app.set_version_flag("--version", wkam::cli::version());

  wkam::cli::RunOptions opts;
  app.add_option("--config", opts.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--command", opts.command, "stage to run")
      ->check(CLI::IsMember(wkam::cli::commands()))
      ->capture_default_str();
  app.add_option("--workers", opts.workers, "worker threads, 0 for all cores")->capture_default_str();
  std::string out_dir;
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "stochastic seed (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 exits 0 for --help/--version and 106/105 etc. for usage errors; normalize the latter to 1
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*out_opt) opts.out_dir = out_dir;
  if (*seed_opt) opts.seed = seed;
  return wkam::cli::run_config(opts, std::cout, std::cerr);
}
