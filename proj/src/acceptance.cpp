#include "nonclip/acceptance.hpp"

#include "nonclip/config.hpp"
#include "nonclip/diagnostics.hpp"
#include "nonclip/experiment.hpp"
#include "nonclip/geometry.hpp"
#include "nonclip/optimizers.hpp"
#include "nonclip/problems.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace nonclip {

namespace {

// Tolerances.
constexpr double kLmoAlignTol = 1e-10;
constexpr double kSharpTol = 1e-10;
constexpr double kReductionTol = 1e-12;
constexpr double kBridgeTol = 1e-12;
constexpr double kConstraintTol = 1e-9;
constexpr double kRateRatioMax = 0.6;
constexpr double kEmaRelTol = 0.10;
constexpr double kFiniteDiffRelTol = 1e-5;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

/// Drops a trailing "; " left by list building.
std::string trimmed(std::string s) {
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "; ") == 0) s.resize(s.size() - 2);
  return s;
}

/// Collects the first few failure messages.
struct Tally {
  bool ok = true;
  int failures = 0;
  std::string notes;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (++failures <= 4) notes += (notes.empty() ? "" : "; ") + what;
  }

  bool finish(std::string& detail, const std::string& summary) const {
    detail = summary;
    if (!ok) detail += " | FAILURES(" + std::to_string(failures) + "): " + notes;
    return ok;
  }
};

Vector random_vector(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Matrix random_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return a;
}

ParamVector as_param(const Vector& v) { return ParamVector{ParamBlock::vector(v)}; }
ParamVector as_param(const Matrix& m) { return ParamVector{ParamBlock::matrix(m)}; }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Nuclear norm and polar factor U V^T from Eigen's divide-and-conquer SVD.
struct Polar {
  double nuclear = 0.0;
  Matrix uv;
};

Polar polar_bdc(const Matrix& m) {
  Eigen::MatrixXd dense = m;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Polar p;
  p.nuclear = svd.singularValues().sum();
  p.uv = svd.matrixU() * svd.matrixV().transpose();
  return p;
}

// --- 1 ----------------------------------------------------------------------

bool lmo_brute_force(std::string& detail) {
  Tally t;
  Rng rng(101);
  constexpr int kDirections = 200;
  double worst_align = 0.0;

  // Max norm: exhaustive over the 2^n vertices of the unit cube.
  double worst_cube = 0.0;
  for (int i = 0; i < kDirections; ++i) {
    const int n = 1 + i % 12;
    const Vector d = random_vector(n, rng);
    double best = std::numeric_limits<double>::infinity();
    Vector best_vertex(n);
    Vector vertex(n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      for (int j = 0; j < n; ++j) vertex(j) = (mask >> j) & 1u ? 1.0 : -1.0;
      const double val = d.dot(vertex);
      if (val < best) {
        best = val;
        best_vertex = vertex;
      }
    }
    const ParamVector l = lmo(NormSpec::max_norm(), as_param(d));
    const Vector lv = l.flatten();
    worst_cube = std::max(worst_cube, (lv - best_vertex).cwiseAbs().maxCoeff());
    t.require(lv == best_vertex, "max-norm lmo differs from the best cube vertex (dim " + std::to_string(n) + ")");
    const double align = rel_err(-d.dot(lv), d.lpNorm<1>());
    worst_align = std::max(worst_align, align);
  }

  // Euclidean: radially projected grid on the surface of [-1, 1]^n.
  constexpr int kGrid = 16;
  double worst_sphere_gap = 0.0;
  for (int i = 0; i < kDirections; ++i) {
    const int n = 1 + i % 5;
    const Vector d = random_vector(n, rng);
    const double dn = d.norm();
    const Vector lv = lmo(NormSpec::euclidean(), as_param(d)).flatten();
    double best = std::numeric_limits<double>::infinity();
    Vector best_u(n);
    std::vector<int> idx(n, 0);
    Vector u(n);
    while (true) {
      bool on_face = false;
      for (int j = 0; j < n; ++j) {
        u(j) = -1.0 + 2.0 * idx[j] / kGrid;
        on_face = on_face || idx[j] == 0 || idx[j] == kGrid;
      }
      if (on_face) {
        const Vector s = u / u.norm();
        const double val = d.dot(s);
        if (val < best) {
          best = val;
          best_u = s;
        }
      }
      int j = 0;
      while (j < n && ++idx[j] > kGrid) idx[j++] = 0;
      if (j == n) break;
    }
    // Nearest grid point lies within delta of the true minimizer; the value gap is at most dn delta^2 / 2.
    const double delta = std::sqrt(static_cast<double>(n - 1)) / kGrid;
    const double val = d.dot(lv);
    const double gap = best - val;
    worst_sphere_gap = std::max(worst_sphere_gap, gap / dn);
    t.require(val <= best + 1e-12 * dn, "euclidean lmo beaten by a grid point");
    t.require(gap <= dn * delta * delta / 2.0 * (1.0 + 1e-9) + 1e-12, "euclidean grid gap beyond resolution");
    t.require((lv - best_u).norm() <= delta * (1.0 + 1e-9) + 1e-12, "euclidean lmo far from grid argmin");
    worst_align = std::max(worst_align, rel_err(-val, dn));
  }

  // Spectral 2x2: rotations and reflections on an angle grid.
  constexpr int kAngles = 3600;
  double worst_o2_gap = 0.0;
  for (int i = 0; i < kDirections; ++i) {
    const Matrix d = random_matrix(2, 2, rng);
    const Matrix lm = lmo(NormSpec::spectral(), as_param(d)).block(0).data();
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kAngles; ++a) {
      const double th = 2.0 * std::numbers::pi * a / kAngles;
      const double c = std::cos(th);
      const double s = std::sin(th);
      const double rot = d(0, 0) * c - d(0, 1) * s + d(1, 0) * s + d(1, 1) * c;
      const double ref = d(0, 0) * c + d(0, 1) * s + d(1, 0) * s - d(1, 1) * c;
      best = std::min({best, rot, ref});
    }
    const double nuclear = std::sqrt(d.squaredNorm() + 2.0 * std::abs(d.determinant()));
    const double val = d.cwiseProduct(lm).sum();
    const double h = std::numbers::pi / kAngles;
    worst_o2_gap = std::max(worst_o2_gap, (best - val) / nuclear);
    t.require(val <= best + 1e-12 * nuclear, "spectral lmo beaten by an O(2) grid point");
    t.require(best - val <= nuclear * h * h / 2.0 * (1.0 + 1e-9) + 1e-12, "spectral grid gap beyond resolution");
    t.require((lm.transpose() * lm - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10,
              "spectral lmo of a full-rank 2x2 is not orthogonal");
    worst_align = std::max(worst_align, rel_err(-val, nuclear));
  }

  // Alignment on larger spectral and product inputs.
  for (int i = 0; i < kDirections; ++i) {
    const Matrix d = random_matrix(2 + i % 5, 1 + i % 4, rng);
    const double val = -d.cwiseProduct(lmo(NormSpec::spectral(), as_param(d)).block(0).data()).sum();
    worst_align = std::max(worst_align, rel_err(val, polar_bdc(d).nuclear));

    const Matrix w = random_matrix(3, 4, rng);
    const Vector b = random_vector(5, rng);
    const Vector e = random_vector(2, rng);
    const ParamVector x{ParamBlock::matrix(w), ParamBlock::vector(b), ParamBlock::vector(e)};
    const NormSpec prod = NormSpec::product({{NormSpec::spectral(), 0.5}, {NormSpec::max_norm(), 2.0},
                                             {NormSpec::euclidean(), 1.5}});
    const double closed = 0.5 * polar_bdc(w).nuclear + 2.0 * b.lpNorm<1>() + 1.5 * e.norm();
    worst_align = std::max(worst_align, rel_err(-inner(x, lmo(prod, x)), closed));
  }
  t.require(worst_align <= kLmoAlignTol, "alignment error " + sci(worst_align));

  return t.finish(detail, "cube vertex mismatch " + sci(worst_cube) + ", sphere gap/|d| " + sci(worst_sphere_gap) +
                              ", O(2) gap/|d|* " + sci(worst_o2_gap) + ", alignment " + sci(worst_align) +
                              " (tol " + sci(kLmoAlignTol) + ")");
}

// --- 2 ----------------------------------------------------------------------

/// Closed-form sharp operator of an atomic norm on one block, plus its dual norm.
std::pair<Matrix, double> atomic_sharp(NormKind kind, const Matrix& d) {
  switch (kind) {
    case NormKind::euclidean:
      return {d, d.norm()};
    case NormKind::max_norm: {
      const double l1 = d.cwiseAbs().sum();
      return {l1 * d.unaryExpr([](double v) { return double((v > 0) - (v < 0)); }), l1};
    }
    case NormKind::spectral: {
      const Polar p = polar_bdc(d);
      return {p.nuclear * p.uv, p.nuclear};
    }
    default:
      throw StructuralError("atomic_sharp: not atomic");
  }
}

bool sharp_identity(std::string& detail) {
  Tally t;
  Rng rng(202);
  constexpr int kInputs = 500;
  double worst[4] = {0, 0, 0, 0};
  double worst_variational = 0.0;

  auto check = [&](int slot, const NormSpec& norm, const ParamVector& d, const ParamVector& oracle) {
    const ParamVector s = sharp(norm, d);
    const ParamVector via_lmo = scale(-dual_norm(norm, d), lmo(norm, d));
    const double scale_ref = std::max(1.0, oracle.flatten().cwiseAbs().maxCoeff());
    const double err = std::max(max_abs_diff(s, oracle), max_abs_diff(via_lmo, oracle)) / scale_ref;
    worst[slot] = std::max(worst[slot], err);
    // <d, d#> - |d#|^2 / 2 = |d|_*^2 / 2
    const double dn = dual_norm(norm, d);
    const double pn = primal_norm(norm, s);
    worst_variational = std::max(worst_variational, rel_err(inner(d, s) - 0.5 * pn * pn, 0.5 * dn * dn));
  };

  for (int i = 0; i < kInputs; ++i) {
    const Vector v = random_vector(1 + i % 9, rng);
    check(0, NormSpec::euclidean(), as_param(v), as_param(Vector(atomic_sharp(NormKind::euclidean, v).first)));
    const Vector w = random_vector(1 + i % 9, rng);
    check(1, NormSpec::max_norm(), as_param(w), as_param(Vector(atomic_sharp(NormKind::max_norm, w).first)));
    const Matrix m = random_matrix(1 + i % 5, 1 + (i / 5) % 5, rng);
    check(2, NormSpec::spectral(), as_param(m), as_param(atomic_sharp(NormKind::spectral, m).first));

    const std::vector<ProductChild> children{{NormSpec::spectral(), 0.5 + (i % 3)},
                                             {NormSpec::max_norm(), 0.25 + (i % 2)},
                                             {NormSpec::euclidean(), 1.0}};
    const std::vector<Matrix> parts{random_matrix(4, 3, rng), Matrix(random_vector(5, rng)),
                                    Matrix(random_vector(3, rng))};
    const ParamVector d{ParamBlock::matrix(parts[0]), ParamBlock::vector(Vector(parts[1])),
                        ParamBlock::vector(Vector(parts[2]))};
    double total = 0.0;
    std::vector<Matrix> dirs;
    for (std::size_t l = 0; l < parts.size(); ++l) {
      auto [s, dn] = atomic_sharp(children[l].norm.kind, parts[l]);
      total += children[l].radius * dn;
      dirs.push_back(dn > 0 ? Matrix(s / dn) : Matrix(Matrix::Zero(s.rows(), s.cols())));
    }
    const ParamVector oracle{ParamBlock::matrix(Matrix(total * children[0].radius * dirs[0])),
                             ParamBlock::vector(Vector(total * children[1].radius * dirs[1])),
                             ParamBlock::vector(Vector(total * children[2].radius * dirs[2]))};
    check(3, NormSpec::product(children), d, oracle);
  }
  const double all = *std::max_element(worst, worst + 4);
  t.require(all <= kSharpTol, "sharp deviation " + sci(all));
  t.require(worst_variational <= kSharpTol, "variational identity off by " + sci(worst_variational));
  return t.finish(detail, "max rel deviation euclidean " + sci(worst[0]) + ", max " + sci(worst[1]) + ", spectral " +
                              sci(worst[2]) + ", product " + sci(worst[3]) + ", variational " +
                              sci(worst_variational) + " (tol " + sci(kSharpTol) + ")");
}

// --- 3 ----------------------------------------------------------------------

double trajectory_deviation(const RunRecord& a, const RunRecord& b) {
  double worst = max_abs_diff(a.final_iterate, b.final_iterate);
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) worst = std::max(worst, max_abs_diff(a.trajectory[k], b.trajectory[k]));
  return worst;
}

bool euclidean_reduction(std::string& detail) {
  Tally t;
  ProblemParams params;
  params.sigma = 0.5;
  const ProblemPtr problem = make_problem(params);
  double worst = 0.0;
  int clipped_steps = 0;
  for (const auto& [gamma, rho] : std::vector<std::pair<double, double>>{{0.05, 0.5}, {0.05, kNoClip}, {0.1, 2.0}}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      OptimizerConfig c;
      c.gamma.gamma = gamma;
      c.rho = rho;
      c.alpha = AlphaSchedule::constant(0.5);
      c.horizon = 100;
      const RunRecord g = run(*problem, c, seed);
      c.algorithm = Algorithm::clipped_gd;
      const RunRecord cg = run(*problem, c, seed);
      const double dev = trajectory_deviation(g, cg);
      worst = std::max(worst, dev);
      for (const auto& row : g.rows) clipped_steps += row.clipped;
      t.require(dev <= kReductionTol, "deviation " + sci(dev) + " at gamma " + sci(gamma) + " rho " + sci(rho));
    }
  }
  return t.finish(detail, "max per-coordinate deviation " + sci(worst) + " over 15 runs x 100 steps, " +
                              std::to_string(clipped_steps) + " clipped steps (tol " + sci(kReductionTol) + ")");
}

// --- 4 ----------------------------------------------------------------------

bool short_step_bridge(std::string& detail) {
  Tally t;
  std::vector<ProblemPtr> problems;
  {
    ProblemParams q;
    q.sigma = 0.5;
    problems.push_back(make_problem(q));
    ProblemParams e;
    e.name = "exp";
    e.dim = 5;
    e.sigma = 0.5;
    problems.push_back(make_problem(e));
  }
  double worst = 0.0;
  int cases = 0;
  for (const auto& problem : problems) {
    for (const NormSpec& norm : {NormSpec::euclidean(), NormSpec::max_norm()}) {
      for (double beta : {1.0, 2.5}) {
        for (double rho : {0.5, 5.0}) {
          for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const double gamma = 0.02;
            Rng oracle_a = Rng(seed).split(10);
            Rng oracle_b = Rng(seed).split(10);
            ParamVector xa = problem->initial_point(seed);
            ParamVector xb = xa;
            MomentumState ma(problem->shapes());
            MomentumState mb(problem->shapes());
            for (int k = 0; k < 100; ++k) {
              const Direction& da = ma.update(problem->stochastic_gradient(xa, oracle_a), k == 0 ? 1.0 : 0.3);
              const Direction& db = mb.update(problem->stochastic_gradient(xb, oracle_b), k == 0 ? 1.0 : 0.3);
              xa = ggnc_step(xa, da, gamma, rho, norm).x_next;
              xb = s3cg_step(xb, db, gamma, rho / beta, beta, norm, ShortStepVariant::v1,
                             ShortStepDirection::ggnc_bridge)
                       .x_next;
              worst = std::max(worst, max_abs_diff(xa, xb));
            }
            ++cases;
          }
        }
      }
    }
  }
  t.require(worst <= kBridgeTol, "bridge deviation " + sci(worst));
  return t.finish(detail, "max deviation " + sci(worst) + " over " + std::to_string(cases) +
                              " trajectories x 100 steps, euclidean + max, beta in {1, 2.5} (tol " +
                              sci(kBridgeTol) + ")");
}

// --- 5 ----------------------------------------------------------------------

bool deterministic_descent(std::string& detail) {
  Tally t;
  std::string summary;
  constexpr std::int64_t kSteps = 1000;
  constexpr std::uint64_t kInits = 10;
  std::size_t violations = 0;

  ProblemParams qp;
  const ProblemPtr quad = make_problem(qp);
  for (const NormSpec& norm : {NormSpec::euclidean(), NormSpec::max_norm()}) {
    const auto c = quad->constants(norm.kind);
    for (double rho : {1.0, kNoClip}) {
      OptimizerConfig cfg;
      cfg.norm = norm;
      cfg.deterministic = true;
      cfg.alpha = AlphaSchedule::constant(1.0);
      cfg.rho = rho;
      cfg.gamma.gamma = 1.0 / (c->L0 + (std::isinf(rho) ? 0.0 : rho * c->L1));
      cfg.horizon = kSteps;
      RunOptions opt;
      opt.store_trajectory = false;
      for (std::uint64_t seed = 0; seed < kInits; ++seed) {
        const auto v = check_descent(run(*quad, cfg, seed, opt));
        violations += v.size();
        t.require(v.empty(), "quadratic " + norm.to_string() + " seed " + std::to_string(seed) + ": " +
                                 std::to_string(v.size()) + " violations");
      }
    }
  }

  ProblemParams ep;
  ep.name = "exp";
  ep.dim = 5;
  const ProblemPtr expf = make_problem(ep);
  for (const NormSpec& norm : {NormSpec::euclidean(), NormSpec::max_norm()}) {
    // Constants come from the probe, not from the analytic bound.
    OptimizerConfig pilot;
    pilot.norm = norm;
    pilot.deterministic = true;
    pilot.alpha = AlphaSchedule::constant(1.0);
    pilot.rho = 1.0;
    pilot.gamma.gamma = 0.01;
    pilot.horizon = 200;
    const RunRecord pilot_run = run(*expf, pilot, 0);
    const ProbeResult probe = smoothness_probe(*expf, probe_pairs(pilot_run, 200, 0.05, 99), norm);
    const double rho = 1.0;
    OptimizerConfig cfg = pilot;
    cfg.gamma.gamma = 1.0 / (probe.L0_hat + rho * probe.L1_hat);
    cfg.rho = rho;
    cfg.horizon = kSteps;
    RunOptions opt;
    opt.store_trajectory = false;
    for (std::uint64_t seed = 0; seed < kInits; ++seed) {
      const auto v = check_descent(run(*expf, cfg, seed, opt));
      violations += v.size();
      t.require(v.empty(), "exp " + norm.to_string() + " seed " + std::to_string(seed) + ": " +
                               std::to_string(v.size()) + " violations");
    }
    summary += "exp/" + norm.to_string() + " probe L0_hat " + sci(probe.L0_hat) + " L1_hat " + sci(probe.L1_hat) +
               " residual " + sci(probe.residual) + ", gamma " + sci(cfg.gamma.gamma) + "; ";
  }
  return t.finish(detail, std::to_string(violations) + " descent violations over 80 runs x " +
                              std::to_string(kSteps) + " steps; " + trimmed(summary));
}

// --- 6 ----------------------------------------------------------------------

bool theorem_bounds(std::string& detail) {
  Tally t;
  int checks = 0;
  double tightest = 0.0;
  std::string tightest_name;
  RunOptions opt;
  opt.store_trajectory = false;

  auto record = [&](const BoundReport& r, const std::string& where) {
    ++checks;
    const double ratio = r.lhs / r.rhs;
    if (ratio > tightest) {
      tightest = ratio;
      tightest_name = where + " " + r.name + " n=" + std::to_string(r.n);
    }
    t.require(r.preconditions_met, where + " " + r.name + ": preconditions not met (" + r.note + ")");
    t.require(r.pass, where + " " + r.name + " n=" + std::to_string(r.n) + ": lhs " + sci(r.lhs) + " > rhs " +
                          sci(r.rhs));
  };

  for (const auto& problem : catalog()) {
    for (const NormSpec& norm : {NormSpec::euclidean(), NormSpec::max_norm()}) {
      const auto c = problem->constants(norm.kind);
      if (!c || !problem->f_star()) continue;
      const std::string where = problem->name() + "/" + norm.to_string();
      for (std::int64_t n : {100, 1000, 10000}) {
        const double sqn = std::sqrt(static_cast<double>(n));
        OptimizerConfig base;
        base.norm = norm;
        base.deterministic = true;
        base.alpha = AlphaSchedule::constant(1.0);
        base.horizon = n;

        // det GGNC at the theorem choice, plus an explicitly clipped variant.
        std::vector<std::pair<double, double>> ggnc_params;  // (gamma, rho)
        if (c->L1 > 0.0 && c->L0 > 0.0) ggnc_params.emplace_back(1.0 / (2.0 * c->L0), c->L0 / c->L1);
        if (c->L1 == 0.0) ggnc_params.emplace_back(1.0 / c->L0, kNoClip);
        const double rho_c = 1.0;
        ggnc_params.emplace_back(1.0 / (c->L0 + rho_c * c->L1), rho_c);
        for (const auto& [gamma, rho] : ggnc_params) {
          OptimizerConfig cfg = base;
          cfg.gamma.gamma = gamma;
          cfg.rho = rho;
          record(check_bound_det_ggnc(run(*problem, cfg, 0, opt), c->L0, c->L1, gamma, rho), where);
        }

        // uSCG: step length gamma rho = 1 / (4 max(L0, L1) sqrt(n)) keeps gamma rho < 1 / (2 L1).
        {
          OptimizerConfig cfg = base;
          cfg.algorithm = Algorithm::uscg;
          cfg.rho = 1.0;
          cfg.gamma.gamma = 1.0 / (4.0 * std::max(c->L0, c->L1) * sqn);
          const RunRecord rec = run(*problem, cfg, 0, opt);
          record(check_bound_det_uscg(rec, c->L0, c->L1, cfg.gamma.gamma, cfg.rho), where);
          if (c->L) record(check_bound_uscg_neighborhood(rec, *c->L, cfg.gamma.gamma, cfg.rho), where);
        }

        // Constrained short step on the unit ball.
        const double beta = 1.0;
        if (const auto L = problem->smoothness_on_ball(norm.kind, beta)) {
          for (double rho : {*L, *L / 4.0}) {
            OptimizerConfig cfg = base;
            cfg.algorithm = Algorithm::s3cg_v1;
            cfg.beta = beta;
            cfg.rho = rho;
            cfg.gamma.gamma = 1.0 / *L;
            record(check_bound_wolfe(run(*problem, cfg, 0, opt), *L, beta, cfg.gamma.gamma, rho), where);
          }
        }
      }
    }
  }
  return t.finish(detail, std::to_string(checks) + " bound checks, largest lhs/rhs " + sci(tightest) + " (" +
                              tightest_name + ")");
}

// --- 7 ----------------------------------------------------------------------

bool constraint_preservation(std::string& detail) {
  Tally t;
  constexpr std::int64_t kSteps = 10000;
  double worst = 0.0;  // max relative excess over the radius
  int runs = 0;

  ProblemParams lp;
  lp.name = "logistic";
  lp.dim = 5;
  ProblemParams mp;
  mp.name = "mlp";
  mp.dim = 4;
  const ProblemPtr logistic = make_problem(lp);
  const ProblemPtr mlp = make_problem(mp);

  struct Case {
    ProblemPtr problem;
    Algorithm algorithm;
    NormSpec norm;
    std::optional<double> beta;
  };
  const NormSpec mlp_spectral = NormSpec::product({{NormSpec::spectral(), 1.0}, {NormSpec::spectral(), 0.5}});
  const NormSpec mlp_mixed = NormSpec::product({{NormSpec::spectral(), 2.0}, {NormSpec::max_norm(), 0.1}});
  const NormSpec logistic_prod = NormSpec::product({{NormSpec::max_norm(), 0.5}});
  const std::vector<Case> cases{
      {logistic, Algorithm::s3cg_v1, NormSpec::euclidean(), 1.0},
      {logistic, Algorithm::s3cg_v2, NormSpec::max_norm(), 0.5},
      {logistic, Algorithm::clipped_scion_v1, logistic_prod, std::nullopt},
      {logistic, Algorithm::clipped_scion_v2, logistic_prod, std::nullopt},
      {mlp, Algorithm::s3cg_v1, NormSpec::euclidean(), 2.0},
      {mlp, Algorithm::s3cg_v2, NormSpec::max_norm(), 0.3},
      {mlp, Algorithm::clipped_scion_v1, mlp_spectral, std::nullopt},
      {mlp, Algorithm::clipped_scion_v2, mlp_mixed, std::nullopt},
  };
  RunOptions opt;
  opt.true_gradient_metrics = false;
  for (const auto& cs : cases) {
    OptimizerConfig cfg;
    cfg.algorithm = cs.algorithm;
    cfg.norm = cs.norm;
    cfg.beta = cs.beta;
    cfg.gamma.gamma = 0.1;
    cfg.rho = 1.0;
    cfg.alpha = AlphaSchedule::constant(0.1);
    cfg.horizon = kSteps;
    const std::string where = cs.problem->name() + "/" + to_string(cs.algorithm) + "/" + cs.norm.to_string();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RunRecord rec;
      try {
        rec = run(*cs.problem, cfg, seed, opt);
      } catch (const std::exception& e) {
        t.require(false, where + ": " + e.what());
        continue;
      }
      ++runs;
      std::vector<const ParamVector*> iterates;
      for (const auto& x : rec.trajectory) iterates.push_back(&x);
      iterates.push_back(&rec.final_iterate);
      double local = 0.0;
      for (const ParamVector* x : iterates) {
        if (cs.norm.is_product()) {
          const auto norms = block_norms(cs.norm, *x);
          for (std::size_t l = 0; l < norms.size(); ++l) {
            const double r = cs.norm.children[l].radius;
            local = std::max(local, (norms[l] - r) / r);
          }
        } else {
          local = std::max(local, (primal_norm(cs.norm, *x) - *cs.beta) / *cs.beta);
        }
      }
      worst = std::max(worst, local);
      t.require(local <= kConstraintTol, where + " seed " + std::to_string(seed) + ": excess " + sci(local));
    }
  }
  return t.finish(detail, std::to_string(runs) + " runs x " + std::to_string(kSteps) +
                              " steps, max relative excess over radius " + sci(worst) + " (tol " +
                              sci(kConstraintTol) + ")");
}

// --- 8 ----------------------------------------------------------------------

/// Mean over seeds of E||grad f(xbar^n)||_2 with xbar uniform over x^1..x^n.
double expected_grad_norm(const Problem& problem, std::int64_t n, int seeds) {
  const auto c = problem.constants(NormKind::euclidean);
  const OptimizerConfig cfg = from_theorem(TheoremPreset::stoch_ggnc, c->L0, 0.0, 0.0, n);
  RunOptions opt;
  opt.store_trajectory = false;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const RunRecord rec = run(problem, cfg, static_cast<std::uint64_t>(s), opt);
    double sum = 0.0;
    for (const auto& row : rec.rows) sum += *row.grad_dual_norm;
    total += sum / static_cast<double>(n);
  }
  return total / seeds;
}

bool stochastic_rate(std::string& detail) {
  Tally t;
  ProblemParams qp;
  qp.sigma = 0.5;
  const ProblemPtr quad = make_problem(qp);
  constexpr int kSeeds = 20;
  const double small = expected_grad_norm(*quad, 256, kSeeds);
  const double large = expected_grad_norm(*quad, 4096, kSeeds);
  const double ratio = large / small;
  t.require(ratio <= kRateRatioMax, "ratio " + sci(ratio));
  return t.finish(detail, "E|grad f(xbar)| n=256: " + sci(small) + ", n=4096: " + sci(large) + ", ratio " +
                              sci(ratio) + " (max " + sci(kRateRatioMax) + ", n^-1/4 predicts 0.5)");
}

// --- 9 ----------------------------------------------------------------------

bool estimator_variance(std::string& detail) {
  Tally t;
  ProblemParams qp;
  qp.sigma = 0.5;
  const ProblemPtr quad = make_problem(qp);
  const double sigma_sq = *quad->variance_bound();
  std::vector<std::uint64_t> seeds(10000);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;

  std::string summary;
  // Frozen point: gamma = 0.
  for (const auto& alpha : {AlphaSchedule::constant(0.1), AlphaSchedule::from_horizon(400)}) {
    OptimizerConfig cfg;
    cfg.gamma.gamma = 0.0;
    cfg.alpha = alpha;
    cfg.horizon = alpha.kind == AlphaSchedule::Kind::horizon ? alpha.horizon : 200;
    const EstimatorStats stats = estimator_error_stats(*quad, cfg, seeds);
    const double a = alpha.at(2);
    const double expected = ema_stationary_variance(a, sigma_sq);
    const double measured = stats.mean_lambda_sq.back();
    const double rel = std::abs(measured - expected) / expected;
    t.require(rel <= kEmaRelTol, "alpha " + sci(a) + ": measured " + sci(measured) + " vs " + sci(expected));
    summary += "alpha " + sci(a) + ": " + sci(measured) + " vs " + sci(expected) + " (rel " + sci(rel) + "); ";
  }

  // Horizon bound with a nominal L1 = 1, for which the constant C is L^2.
  const double L = quad->constants(NormKind::euclidean)->L0;
  const double C = L * L;
  std::vector<std::uint64_t> few(seeds.begin(), seeds.begin() + 200);
  for (std::int64_t n : {64, 256, 1024}) {
    const OptimizerConfig cfg = from_theorem(TheoremPreset::stoch_ggnc, L, 1.0, L, n);
    const EstimatorStats stats = estimator_error_stats(*quad, cfg, few);
    const double bound = 2.0 * (sigma_sq + C) / std::sqrt(static_cast<double>(n));
    const double peak = *std::max_element(stats.mean_lambda_sq.begin(), stats.mean_lambda_sq.end());
    const double c_hat = fit_horizon_constant(stats.mean_lambda_sq, sigma_sq, n);
    t.require(peak <= bound, "n=" + std::to_string(n) + ": max_k E|lambda|^2 " + sci(peak) + " > " + sci(bound));
    const double tail = stats.mean_lambda_sq.back();
    summary += "n=" + std::to_string(n) + " max " + sci(peak) + " final " + sci(tail) + " <= " + sci(bound) +
               ", C_hat " + sci(c_hat) + "; ";
  }
  return t.finish(detail, trimmed(summary));
}

// --- 10 ---------------------------------------------------------------------

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool byte_identical(std::string& detail) {
  namespace fs = std::filesystem;
  Tally t;
  const fs::path root = fs::temp_directory_path() / ("nonclip_determinism_" + std::to_string(Rng::mix(
                                                         static_cast<std::uint64_t>(
                                                             std::chrono::steady_clock::now().time_since_epoch().count()))));
  std::vector<ExperimentConfig> configs(3);
  configs[0].problem.sigma = 0.5;
  configs[0].optimizer.rho = 1.0;
  configs[0].optimizer.horizon = 300;
  configs[0].seeds = {0, 1, 2};
  configs[1].problem.name = "mlp";
  configs[1].problem.dim = 4;
  configs[1].optimizer.algorithm = Algorithm::clipped_scion_v1;
  configs[1].optimizer.norm = NormSpec::product({{NormSpec::spectral(), 1.0}, {NormSpec::max_norm(), 0.5}});
  configs[1].optimizer.rho = 1.0;
  configs[1].optimizer.horizon = 200;
  configs[1].seeds = {3, 4};
  configs[2].problem.name = "logistic";
  configs[2].problem.dim = 5;
  configs[2].optimizer.algorithm = Algorithm::s3cg_v2;
  configs[2].optimizer.beta = 1.0;
  configs[2].optimizer.rho = 1.0;
  configs[2].optimizer.horizon = 200;
  configs[2].seeds = {5, 6};
  std::size_t files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const fs::path a = root / ("c" + std::to_string(i) + "_a");
    const fs::path b = root / ("c" + std::to_string(i) + "_b");
    const auto fa = run_experiment(configs[i], a.string(), 1);
    const auto fb = run_experiment(configs[i], b.string(), 3);
    for (std::size_t j = 0; j < fa.size(); ++j) {
      ++files;
      const std::string name = fs::path(fa[j]).filename().string();
      t.require(name == fs::path(fb[j]).filename().string(), "file lists differ");
      t.require(read_file(fa[j]) == read_file(fb[j]), "bytes differ in " + name);
    }
  }
  ExperimentConfig sweep = configs[0];
  sweep.optimizer.horizon = 50;
  sweep.seeds = {0};
  const auto sa = run_sweep(sweep, (root / "sweep_a").string(), 1);
  const auto sb = run_sweep(sweep, (root / "sweep_b").string(), 4);
  ++files;
  t.require(read_file(sa) == read_file(sb), "sweep bytes differ");
  std::error_code ec;
  fs::remove_all(root, ec);
  return t.finish(detail, std::to_string(files) + " file pairs compared (jobs 1 vs 3/4), all byte-identical");
}

// --- 11 ---------------------------------------------------------------------

bool finite_differences(std::string& detail) {
  Tally t;
  std::string summary;
  Rng rng(1111);
  for (const auto& problem : catalog()) {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      ParamVector x = problem->initial_point(static_cast<std::uint64_t>(i));
      for (Eigen::Index j = 0; j < x.total_size(); ++j) x.coord(j) += 0.5 * rng.normal();
      const Direction g = problem->gradient(x);
      const Direction fd = finite_diff_grad(*problem, x);
      const double rel = distance(g, fd) / std::max(euclidean_norm(g), 1e-8);
      worst = std::max(worst, rel);
    }
    t.require(worst <= kFiniteDiffRelTol, problem->name() + " relative error " + sci(worst));
    summary += problem->name() + " " + sci(worst) + "; ";
  }
  return t.finish(detail, "max relative error per problem: " + trimmed(summary) + " (tol " + sci(kFiniteDiffRelTol) + ")");
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> all{
      {1, "lmo_matches_brute_force", 30.0, lmo_brute_force},
      {2, "sharp_duality_identity", 10.0, sharp_identity},
      {3, "euclidean_ggnc_equals_clipped_gd", 60.0, euclidean_reduction},
      {4, "short_step_bridge_reproduces_ggnc", 60.0, short_step_bridge},
      {5, "deterministic_descent", 120.0, deterministic_descent},
      {6, "theorem_bounds_hold", 300.0, theorem_bounds},
      {7, "constraints_preserved", 300.0, constraint_preservation},
      {8, "stochastic_rate_trend", 600.0, stochastic_rate},
      {9, "estimator_variance", 120.0, estimator_variance},
      {10, "byte_identical_output", 60.0, byte_identical},
      {11, "gradients_match_finite_differences", 60.0, finite_differences},
  };
  return all;
}

CriterionResult run_criterion(const Criterion& criterion) {
  CriterionResult r;
  r.id = criterion.id;
  r.name = criterion.name;
  r.budget_seconds = criterion.budget_seconds;
  const auto start = std::chrono::steady_clock::now();
  try {
    r.pass = criterion.body(r.detail);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail += std::string(" | exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.seconds > r.budget_seconds) {
    r.pass = false;
    r.detail += " | over time budget " + sci(r.budget_seconds) + " s";
  }
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, std::ostream* progress) {
  std::vector<CriterionResult> out;
  for (const auto& c : acceptance_criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    out.push_back(run_criterion(c));
    if (progress) *progress << format_result(out.back()) << std::endl;
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof(secs), "%.2f", r.seconds);
  return std::string(r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + " (" + secs +
         " s): " + r.detail;
}

}  // namespace nonclip
