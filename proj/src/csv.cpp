#include "nonclip/csv.hpp"

#include "nonclip/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace nonclip {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

std::string csv_number(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string trajectory_csv(const RunRecord& record) {
  std::string out = std::string(kTrajectoryHeader) + '\n';
  for (const auto& r : record.rows) {
    out += csv_line({std::to_string(r.k), format_double(r.f), format_double(r.dual_norm), format_double(r.eta),
                     r.clipped ? "1" : "0", format_double(r.gamma_k), csv_number(r.wolfe_gap),
                     format_double(r.param_norm), csv_number(r.lambda_sq)});
  }
  return out;
}

SummaryRow summarize(const RunRecord& record, std::optional<BoundReport> bound) {
  SummaryRow row;
  row.seed = record.seed;
  row.f_final = record.summary.f_final;
  row.f_bar = record.summary.f_xbar;
  row.min_dual_norm = record.summary.min_grad_dual_norm;
  if (!row.min_dual_norm && !record.rows.empty()) {
    double m = record.rows.front().dual_norm;
    for (const auto& r : record.rows) m = std::min(m, r.dual_norm);
    row.min_dual_norm = m;
  }
  row.bound = std::move(bound);
  return row;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + '\n';
  for (const auto& r : rows) {
    out += csv_line({std::to_string(r.seed), format_double(r.f_final), format_double(r.f_bar),
                     csv_number(r.min_dual_norm), r.bound ? format_double(r.bound->lhs) : "",
                     r.bound ? format_double(r.bound->rhs) : "", r.bound ? (r.bound->pass ? "1" : "0") : ""});
  }
  return out;
}

std::string probe_csv(const std::vector<std::pair<std::uint64_t, ProbeResult>>& probes) {
  std::string out = "seed,ratio,gnorm,sep\n";
  for (const auto& [seed, p] : probes) {
    for (const auto& s : p.samples) {
      out += csv_line({std::to_string(seed), format_double(s.ratio), format_double(s.gnorm), format_double(s.sep)});
    }
  }
  return out;
}

std::string probe_fit_csv(const std::vector<std::pair<std::uint64_t, ProbeResult>>& probes) {
  std::string out = "seed,L0_hat,L1_hat,residual,samples,rejected\n";
  for (const auto& [seed, p] : probes) {
    out += csv_line({std::to_string(seed), format_double(p.L0_hat), format_double(p.L1_hat),
                     format_double(p.residual), std::to_string(p.samples.size()), std::to_string(p.rejected)});
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent, ec);
  if (ec) {
    throw std::runtime_error("cannot create directory '" + parent.string() + "' for '" + path + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace nonclip
