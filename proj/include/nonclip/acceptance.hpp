#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace nonclip {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Criterion {
  int id = 0;
  std::string name;
  /// Wall-clock limit; exceeding it fails the criterion.
  double budget_seconds = 0.0;
  /// Returns pass/fail and appends a human-readable summary to `detail`.
  std::function<bool(std::string& detail)> body;
};

/// The eleven acceptance checks, in order.
const std::vector<Criterion>& acceptance_criteria();

CriterionResult run_criterion(const Criterion& criterion);

/// Runs the selected ids (all when empty). Each result line is written to `progress` as soon as it is known.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {}, std::ostream* progress = nullptr);

/// "PASS [3] name (0.12 s): detail"
std::string format_result(const CriterionResult& result);

}  // namespace nonclip
