#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "anisofrac/config.hpp"
#include "anisofrac/parallel.hpp"
#include "anisofrac/runner.hpp"

int main(int argc, char** argv) {
  using namespace anisofrac;
  CLI::App app{"Anisotropic fractional energies: quadrature, limits, solvers, homogenization"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  bool breakdown = false;
  app.add_option("--config", config_path, "Experiment config file")->required();
  app.add_option("--out", out_path, "Output CSV path (overrides [output] path)");
  app.add_option("--threads", threads, "Worker threads (fallback: ANISOFRAC_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Seed for randomized audits");
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name);
    if (name == "energy") sub->add_flag("--breakdown", breakdown, "Add the near/bulk/tail split");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config '" << config_path << "'\n";
    return kValidation;
  }
  std::stringstream text;
  text << in.rdbuf();

  ExperimentConfig config;
  try {
    config = parse_config(text.str());
  } catch (const ConfigError& e) {
    for (const auto& issue : e.issues()) {
      std::cerr << config_path;
      if (issue.line > 0) std::cerr << ':' << issue.line;
      std::cerr << ": " << issue.message << '\n';
    }
    return kValidation;
  }
  config.subcommand = app.get_subcommands().front()->get_name();
  if (!out_path.empty()) config.output_path = out_path;
  if (seed) config.seed = *seed;
  if (breakdown) config.breakdown = true;
  if (!config.kernel_table.empty()) {
    const std::filesystem::path table(config.kernel_table);
    const auto beside = std::filesystem::path(config_path).parent_path() / table;
    if (table.is_relative() && !std::filesystem::exists(table) && std::filesystem::exists(beside))
      config.kernel_table = beside.string();
  }
  if (threads > 0) set_thread_count(threads);

  try {
    return run(config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
