#pragma once

#include "nonclip/diagnostics.hpp"
#include "nonclip/record.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nonclip {

inline constexpr const char* kTrajectoryHeader = "k,f,dual_norm,eta,clipped,gamma_k,wolfe_gap,param_norm,lambda_sq";
inline constexpr const char* kSummaryHeader = "seed,f_final,f_bar,min_dual_norm,bound_lhs,bound_rhs,bound_pass";

/// Quotes a field when it holds a comma, quote, CR or LF; inner quotes are doubled.
std::string csv_field(const std::string& s);
std::string csv_line(const std::vector<std::string>& fields);
/// format_double, or the empty field.
std::string csv_number(const std::optional<double>& v);

/// Header plus one line per iteration. Missing metrics are empty fields.
std::string trajectory_csv(const RunRecord& record);

struct SummaryRow {
  std::uint64_t seed = 0;
  double f_final = 0.0;
  double f_bar = 0.0;
  std::optional<double> min_dual_norm;
  std::optional<BoundReport> bound;
};

/// Summary line for `record`; min_dual_norm prefers true-gradient norms over ||d^k||_*.
SummaryRow summarize(const RunRecord& record, std::optional<BoundReport> bound);
std::string summary_csv(const std::vector<SummaryRow>& rows);

std::string probe_csv(const std::vector<std::pair<std::uint64_t, ProbeResult>>& probes);
std::string probe_fit_csv(const std::vector<std::pair<std::uint64_t, ProbeResult>>& probes);

/// Writes `text` to `path` in binary mode, creating parent directories. Throws std::runtime_error naming the path.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace nonclip
