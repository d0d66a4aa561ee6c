#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "anisofrac/kernel.hpp"

namespace anisofrac {

struct ConfigIssue {
  int line = 0;  // 0 when the issue is not tied to a line
  std::string message;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  [[nodiscard]] const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Defaults are listed in the README.
struct ExperimentConfig {
  std::string subcommand;

  std::string kernel_name = "constant";
  ParamMap kernel_params;
  std::string kernel_table;

  int n = 1;
  std::vector<double> box;  // empty: [-1,1]^n
  int N = 65;

  double s = 0.5;
  double p = 2.0;
  std::vector<double> s_list;    // empty: subcommand default
  std::vector<double> eps_list;  // empty: {1/4, 1/8, 1/16}
  std::string u = "bump(-1, 1)";
  std::string f = "const(1)";
  double tol = 0.0;
  int max_iter = 10000;
  int sample_budget = 256;
  std::uint64_t seed = 0;
  int cell_N = 512;
  std::string method = "automatic";
  int angles = 64;

  std::string output_path;
  bool breakdown = false;
};

// Sections [kernel], [grid], [params], [output] with `key = value` lines.
// Values: numbers, "strings", [lists, of, numbers], true/false. Unknown keys
// are errors; all issues are collected before throwing ConfigError.
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);

// Range checks shared by parse_config and command-line overrides.
[[nodiscard]] std::vector<ConfigIssue> validate(const ExperimentConfig& config);

}  // namespace anisofrac
