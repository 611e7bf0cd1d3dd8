#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wide/problem.hpp"

namespace wide {

// Flat key = value configuration ('#' comments, dotted keys for nested
// specs). Unknown keys are rejected so typos fail loudly.
struct ConfigMap {
  std::map<std::string, std::string> entries;

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;           // throws if absent
  std::string get_or(const std::string& key, const std::string& dflt) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double dflt) const;
  long integer(const std::string& key) const;
  long integer_or(const std::string& key, long dflt) const;
  std::vector<double> number_list(const std::string& key) const;
};

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

enum class RunMode { Run, Sweep, Pde, Check, Oracle };
RunMode parse_mode(const std::string& word);

struct ExperimentConfig {
  RunMode mode = RunMode::Run;
  std::uint64_t seed = 1;
  std::string out_dir = ".";

  // Problem catalogue: linear, double_well, selection, play, power_flow,
  // heat, wave — or custom via explicit keys.
  std::string problem_kind;
  ConfigMap raw;

  std::vector<double> epsilons;  // single-entry for run/check
  std::string tau_rule;          // "fixed" or "eps_squared"
  std::string reference;         // oracle/sweep reference id
  std::string solver;            // auto|banded|newton|prox
};

// Validates mode/keys and builds the typed config (ConfigError on any
// violation: unknown key, missing required key, bad value).
ExperimentConfig load_experiment(const std::string& path);

// Builds the WideProblem described by the config (validates problem-core
// invariants; ConfigError wraps any rejection).
WideProblem build_problem(const ExperimentConfig& config);

// Executes the experiment; returns the process exit code (0 success,
// 2 solve failure, 3 config error, 4 diagnostic failure in check mode).
int run_experiment(const ExperimentConfig& config);

}  // namespace wide
