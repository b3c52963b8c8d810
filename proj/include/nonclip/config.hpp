#pragma once

#include "nonclip/errors.hpp"
#include "nonclip/optimizers.hpp"
#include "nonclip/problems.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nonclip {

/// Everything one `run`, `sweep` or `probe` invocation needs.
struct ExperimentConfig {
  ProblemParams problem;
  OptimizerConfig optimizer;
  std::vector<std::uint64_t> seeds{0};
  std::string output = "out";
  bool store_trajectory = true;
  /// Turns off the alpha_1 = 1 override so d^1 = alpha g^1.
  bool paper_literal_momentum = false;
  /// Grid for `sweep`; rho = inf is the no-clip row.
  std::vector<double> sweep_gammas;
  std::vector<double> sweep_rhos;

  ExperimentConfig();

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parse failure pinned to a line (0 when not line-specific) and a key.
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Reads `key = value` lines; see docs/config.md for the grammar. Throws ConfigParseError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Every key, in a fixed order. parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Semantic checks: resolvable problem, at least one seed, optimizer valid for the problem layout.
/// Throws ConfigParseError naming the offending field.
void validate_experiment(const ExperimentConfig& config);

/// The optimizer config with run-level flags applied.
OptimizerConfig effective_optimizer(const ExperimentConfig& config);

/// Shortest decimal that reads back to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);

}  // namespace nonclip
