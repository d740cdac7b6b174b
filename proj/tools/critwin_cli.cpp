#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "critwin/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Phase-transition diagnostics for diffusion models on lattice Gaussian mixtures"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;

  struct Entry {
    const char* name;
    const char* help;
  };
  const Entry entries[] = {
      {"score-gap", "conditioning gap curve and locality gap heatmap"},
      {"fb", "forward-backward class survival curves"},
      {"window-cond", "windowed conditioning scan"},
      {"window-local", "windowed locality scan"},
      {"cmi", "conditional mutual information and Markov length"},
  };
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override master_seed");
    sub->add_option("--out", out_dir, "override output directory");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : critwin::kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const critwin::RunResult res =
      critwin::run(config_path, critwin::probe_kind_from_string(name), {seed, out_dir, workers});
  (res.exit_code == critwin::kExitOk ? std::cout : std::cerr) << res.message << "\n";
  return res.exit_code;
}
