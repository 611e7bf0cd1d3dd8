#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wide/config.hpp"
#include "wide/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Weighted inertia-dissipation-energy experiment runner"};
  std::string config_path;
  std::string mode_word;
  std::string out_dir = ".";
  std::int64_t seed = -1;
  app.add_option("--config", config_path, "Path to the key=value config file")
      ->required();
  app.add_option("--mode", mode_word,
                 "Override the config mode: run|sweep|pde|check|oracle");
  app.add_option("--out", out_dir, "Output directory for CSV artifacts");
  app.add_option("--seed", seed, "Override the config seed");
  CLI11_PARSE(app, argc, argv);

  try {
    wide::ExperimentConfig config = wide::load_experiment(config_path);
    if (!mode_word.empty()) config.mode = wide::parse_mode(mode_word);
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    config.out_dir = out_dir;
    std::filesystem::create_directories(out_dir);
    return wide::run_experiment(config);
  } catch (const wide::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
