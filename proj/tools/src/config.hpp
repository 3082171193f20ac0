#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tbnls/harness.hpp"

namespace tbnls::cli {

/// Everything an experiment needs; the sectioned text form is the record.
struct ExperimentConfig {
  LatticeSpec lattice;

  double hbar = 0.1;
  std::vector<double> hbar_list{0.14, 0.12, 0.10, 0.08, 0.06};
  Regime model = Regime::model1;
  double F = 0.0;    // custom model only
  double eta = 0.0;  // custom model only
  double k_F = 1.0;
  double k_eta = 1.0;
  double k_T = 1.0;
  double gamma = 0.5;

  SplitScheme scheme = SplitScheme::bloch_exact;
  double dt = 0.0;          // 0: scheme default
  double final_time = 0.0;  // 0: the regime's window
  int monitor_stride = 50;
  long min_steps = 2000;
  double wall_budget = 600.0;  // seconds per trajectory, 0: unlimited

  std::string initial_state = "gaussian";  // gaussian | random
  int initial_width = 5;
  unsigned long long seed = 1;
  int workers = 0;

  std::string output_directory = "out";
  bool snapshots = false;
};

struct ConfigIssue {
  int line = 0;  // 0: command-line override
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses and validates; throws ConfigError listing every problem found.
/// `overrides` are "section.key=value" strings applied on top of the text.
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace tbnls::cli
