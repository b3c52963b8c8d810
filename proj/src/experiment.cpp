#include "nonclip/experiment.hpp"

#include "nonclip/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <thread>

namespace nonclip {

std::optional<BoundReport> applicable_bound(const Problem& problem, const OptimizerConfig& config,
                                            const RunRecord& record) {
  if (!config.deterministic || config.gamma.kind != StepsizeSchedule::Kind::constant) return std::nullopt;
  if (!record.summary.delta || !record.summary.min_grad_dual_norm) return std::nullopt;
  const double gamma = config.gamma.gamma;
  if (!(gamma > 0.0)) return std::nullopt;
  switch (config.algorithm) {
    case Algorithm::ggnc: {
      const auto c = problem.constants(config.norm.kind);
      if (!c) return std::nullopt;
      return check_bound_det_ggnc(record, c->L0, c->L1, gamma, config.rho);
    }
    case Algorithm::uscg: {
      const auto c = problem.constants(config.norm.kind);
      if (!c) return std::nullopt;
      return check_bound_det_uscg(record, c->L0, c->L1, gamma, config.rho);
    }
    case Algorithm::s3cg_v1: {
      const auto L = problem.smoothness_on_ball(config.norm.kind, *config.beta);
      if (!L || !record.summary.min_wolfe_gap) return std::nullopt;
      return check_bound_wolfe(record, *L, *config.beta, gamma, config.rho);
    }
    default:
      return std::nullopt;
  }
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string trajectory_filename(const RunRecord& record) {
  return record.problem + "_" + record.algorithm + "_seed" + std::to_string(record.seed) + ".csv";
}

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

RunOptions options_for(const ExperimentConfig& config) {
  RunOptions options;
  options.store_trajectory = config.store_trajectory;
  return options;
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& config, const std::string& out_dir, int jobs) {
  validate_experiment(config);
  const ProblemPtr problem = make_problem(config.problem);
  const OptimizerConfig optimizer = effective_optimizer(config);
  const RunOptions options = options_for(config);

  std::vector<SummaryRow> summary(config.seeds.size());
  std::vector<std::string> files(config.seeds.size());
  parallel_for(config.seeds.size(), jobs, [&](std::size_t i) {
    const RunRecord rec = run(*problem, optimizer, config.seeds[i], options);
    files[i] = join_path(out_dir, trajectory_filename(rec));
    write_text_file(files[i], trajectory_csv(rec));
    summary[i] = summarize(rec, applicable_bound(*problem, optimizer, rec));
    log_info("wrote " + files[i]);
  });
  files.push_back(join_path(out_dir, "summary.csv"));
  write_text_file(files.back(), summary_csv(summary));
  return files;
}

std::string run_sweep(const ExperimentConfig& config, const std::string& out_dir, int jobs) {
  validate_experiment(config);
  if (config.sweep_gammas.empty() || config.sweep_rhos.empty()) {
    throw ConfigParseError(0, "sweep", "sweep.gammas and sweep.rhos must be non-empty");
  }
  const ProblemPtr problem = make_problem(config.problem);
  const OptimizerConfig base = effective_optimizer(config);
  RunOptions options;
  options.store_trajectory = false;

  struct Cell {
    double rho = 0.0;
    double gamma = 0.0;
    double sum_f = 0.0;
    double sum_min = 0.0;
    std::size_t ok = 0;
    std::size_t diverged = 0;
  };
  std::vector<Cell> cells;
  for (double rho : config.sweep_rhos) {
    for (double gamma : config.sweep_gammas) cells.push_back({rho, gamma});
  }
  for (const auto& cell : cells) {
    OptimizerConfig c = base;
    c.rho = cell.rho;
    c.gamma.gamma = cell.gamma;
    try {
      c.validate(problem->shapes());
    } catch (const ConfigError& e) {
      throw ConfigParseError(0, "sweep", "rho " + format_double(cell.rho) + ", gamma " + format_double(cell.gamma) +
                                             ": " + e.what());
    }
  }

  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    Cell& cell = cells[i];
    OptimizerConfig c = base;
    c.rho = cell.rho;
    c.gamma.gamma = cell.gamma;
    for (std::uint64_t seed : config.seeds) {
      try {
        const RunRecord rec = run(*problem, c, seed, options);
        const SummaryRow row = summarize(rec, std::nullopt);
        if (!std::isfinite(rec.summary.f_final)) {
          ++cell.diverged;
          continue;
        }
        cell.sum_f += rec.summary.f_final;
        cell.sum_min += row.min_dual_norm.value_or(0.0);
        ++cell.ok;
      } catch (const IterationError& e) {
        log_info("sweep cell diverged: " + std::string(e.what()));
        ++cell.diverged;
      }
    }
  });

  std::string out = "row,rho,gamma,mean_f_final,mean_min_dual_norm,diverged_seeds\n";
  for (const auto& cell : cells) {
    const bool any = cell.ok > 0;
    const double count = static_cast<double>(cell.ok);
    out += csv_line({std::isinf(cell.rho) ? "no-clip" : "rho=" + format_double(cell.rho), format_double(cell.rho),
                     format_double(cell.gamma), any ? format_double(cell.sum_f / count) : "",
                     any ? format_double(cell.sum_min / count) : "", std::to_string(cell.diverged)});
  }
  const std::string path = join_path(out_dir, "sweep.csv");
  write_text_file(path, out);
  return path;
}

std::vector<std::string> run_probe(const ExperimentConfig& config, const std::string& out_dir, int jobs) {
  validate_experiment(config);
  const ProblemPtr problem = make_problem(config.problem);
  const OptimizerConfig optimizer = effective_optimizer(config);
  RunOptions options;
  options.store_trajectory = true;
  options.true_gradient_metrics = false;

  std::optional<double> hypothesis;
  if (const auto c = problem->constants(optimizer.norm.kind); c && c->L1 > 0.0) hypothesis = c->L1;

  std::vector<std::pair<std::uint64_t, ProbeResult>> probes(config.seeds.size());
  parallel_for(config.seeds.size(), jobs, [&](std::size_t i) {
    const std::uint64_t seed = config.seeds[i];
    const RunRecord rec = run(*problem, optimizer, seed, options);
    const auto pairs = probe_pairs(rec, 200, 0.1, Rng::mix(seed ^ 0x70726F6265ULL));
    probes[i] = {seed, smoothness_probe(*problem, pairs, optimizer.norm, hypothesis)};
  });
  std::vector<std::string> files{join_path(out_dir, "probe.csv"), join_path(out_dir, "probe_fit.csv")};
  write_text_file(files[0], probe_csv(probes));
  write_text_file(files[1], probe_fit_csv(probes));
  return files;
}

}  // namespace nonclip
