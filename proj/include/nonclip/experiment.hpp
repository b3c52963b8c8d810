#pragma once

#include "nonclip/config.hpp"
#include "nonclip/csv.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nonclip {

/// The theorem bound that applies to a deterministic run with a constant step size, if any:
/// det GGNC for GGNC, det uSCG for uSCG and the Wolfe-gap bound for S3CG variant 1.
std::optional<BoundReport> applicable_bound(const Problem& problem, const OptimizerConfig& config,
                                            const RunRecord& record);

/// Runs task(0) .. task(count - 1) on up to `jobs` threads. Exceptions are rethrown in index order.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// One CSV per seed plus summary.csv under `out_dir`. Returns the files written, summary last.
std::vector<std::string> run_experiment(const ExperimentConfig& config, const std::string& out_dir, int jobs);

/// Grid over sweep.rhos x sweep.gammas; writes sweep.csv. rho = inf rows are labeled no-clip.
std::string run_sweep(const ExperimentConfig& config, const std::string& out_dir, int jobs);

/// Smoothness probe along each seed's trajectory; writes probe.csv and probe_fit.csv.
std::vector<std::string> run_probe(const ExperimentConfig& config, const std::string& out_dir, int jobs);

std::string trajectory_filename(const RunRecord& record);

}  // namespace nonclip
