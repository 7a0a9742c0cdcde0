#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "backsolve/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Least-squares space-time solver for the backward heat equation"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path, output_path;
  uint64_t seed = 0;
  int threads = 1;
  run->add_option("--config", config_path, "experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  auto* output_opt =
      run->add_option("--output", output_path, "CSV output (default: config)");
  auto* seed_opt = run->add_option("--seed", seed, "overrides the config seed");
  run->add_option("--threads", threads, "levels solved concurrently")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream file(config_path);
    std::stringstream text;
    text << file.rdbuf();
    backsolve::ExperimentConfig config = backsolve::ParseConfig(text.str());
    if (*seed_opt) config.seed = seed;
    if (*output_opt) config.output_path = output_path;

    const backsolve::ResultTable table =
        backsolve::RunExperiment(config, threads, &std::cerr);
    if (config.output_path.empty() || config.output_path == "-") {
      backsolve::WriteCsv(table, std::cout);
    } else {
      std::ofstream out(config.output_path);
      if (!out) throw std::runtime_error("cannot open " + config.output_path);
      backsolve::WriteCsv(table, out);
      if (!out) throw std::runtime_error("write failed: " + config.output_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "backsolve: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
