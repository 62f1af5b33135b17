#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "jfnk/newton.hpp"
#include "jfnk/numerics.hpp"
#include "jfnk/problems/burgers.hpp"
#include "jfnk/problems/maxwell_kerr.hpp"
#include "jfnk/problems/reaction_diffusion.hpp"
#include "jfnk/problems/su_olson.hpp"

// Experiment harness: time-marching IBVP runs, frequency-continuation BVP
// runs, outcome classification, and sweep execution with JSONL records.

namespace jfnk {

inline constexpr int kRecordSchemaVersion = 1;

enum class ProblemKind { Burgers, SuOlson, ReactionDiffusion, MaxwellKerr };

inline const char* to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::Burgers: return "burgers";
    case ProblemKind::SuOlson: return "suolson";
    case ProblemKind::ReactionDiffusion: return "rd";
    default: return "maxwell";
  }
}

enum class RunStatus { Converged, ConvergedWithWarnings, Failed };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::ConvergedWithWarnings: return "converged_with_warnings";
    default: return "failed";
  }
}

enum class FailureReason { NonFinite, SolverBreakdown, TooManyUnconvergedSteps };

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::NonFinite: return "non_finite";
    case FailureReason::SolverBreakdown: return "solver_breakdown";
    default: return "too_many_unconverged_steps";
  }
}

struct ProblemSpec {
  ProblemKind problem = ProblemKind::Burgers;
  std::string ic = "tgv";  // ic or source id
  double param = 0.1;      // nu | xi | D | chi
  int grid_n = 64;
  double courant = 1.0;
  Precision precision = Precision::FP64;
};

struct RunConfig {
  ProblemSpec spec;
  JvpStrategy jvp = JvpStrategy::AD;
  KrylovMethod krylov = KrylovMethod::GMRES;
  int steps = 200;
  std::vector<double> omegas = {14, 15, 16, 17, 18};
  double tol_newton = 0;  // 0 = precision default
  double tol_krylov = 0;
};

struct RunRecord {
  RunConfig config;
  double wall_time_s = 0;
  long newton_iters_total = 0;
  long krylov_iters_total = 0;
  long steps_total = 0;
  long steps_unconverged = 0;
  long backtracks_total = 0;
  RunStatus status = RunStatus::Converged;
  std::optional<FailureReason> failure_reason;
  std::vector<double> per_step_relres;
};

// One id per solver variant / problem configuration, matching the legend
// structure of the performance profiles.
inline std::string solver_id(const RunRecord& r) {
  return std::string(to_string(r.config.jvp)) + "-" + to_string(r.config.spec.precision) + "-" +
         to_string(r.config.krylov);
}

inline std::string problem_id(const RunRecord& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", r.config.spec.param);
  return std::string(to_string(r.config.spec.problem)) + "-" + r.config.spec.ic + "-" + buf +
         "-g" + std::to_string(r.config.spec.grid_n);
}

// Failure criteria: hard failures (non-finite values, solver breakdown)
// override everything; more than 20% unconverged continuation steps is a
// failure; a nonzero fraction up to 20% converges with warnings.
inline RunStatus classify(long steps_total, long steps_unconverged,
                          std::optional<FailureReason> hard_failure) {
  JFNK_REQUIRE(steps_total > 0, "classify: steps_total must be positive");
  if (hard_failure) return RunStatus::Failed;
  if (5 * steps_unconverged > steps_total) return RunStatus::Failed;
  return steps_unconverged > 0 ? RunStatus::ConvergedWithWarnings : RunStatus::Converged;
}

namespace detail {

template <class T>
KrylovConfig<T> make_kcfg(const RunConfig& cfg) {
  KrylovConfig<T> k;
  k.method = cfg.krylov;
  if (cfg.tol_krylov > 0) k.rel_tol = static_cast<T>(cfg.tol_krylov);
  // The Maxwell BVP linearizations carry a shell of weakly damped resonant
  // modes that restarted GMRES cannot resolve with short cycles; the cycle
  // cap stays at 100.
  if (cfg.spec.problem == ProblemKind::MaxwellKerr) k.restart_len = 512;
  return k;
}

template <class T>
NewtonConfig<T> make_ncfg(const RunConfig& cfg, bool bvp) {
  NewtonConfig<T> n;
  n.max_newton = bvp ? 50 : 15;
  if (cfg.tol_newton > 0) n.tol_newton = static_cast<T>(cfg.tol_newton);
  return n;
}

template <class T>
GridSpec<T> make_grid(const ProblemSpec& spec) {
  const int n = spec.grid_n;
  switch (spec.problem) {
    case ProblemKind::Burgers: {
      const T two_pi = T(2) * std::numbers::pi_v<T>;
      return GridSpec<T>::make(n, n, T(0), two_pi, T(0), two_pi, BoundaryKind::Periodic);
    }
    case ProblemKind::SuOlson:
      return GridSpec<T>::make(n, n, T(-5), T(5), T(-5), T(5),
                               spec.ic == "box" ? BoundaryKind::PeriodicYDirichletX
                                                : BoundaryKind::Dirichlet0);
    case ProblemKind::ReactionDiffusion:
      return GridSpec<T>::make(n, n, T(-0.5), T(0.5), T(-0.5), T(0.5), BoundaryKind::Dirichlet0);
    default:
      return GridSpec<T>::make(n, n, T(0), T(1), T(0), T(1), BoundaryKind::Pec);
  }
}

template <class T>
BurgersIc burgers_ic_kind(const std::string& id) {
  if (id == "tgv") return BurgersIc::Tgv;
  if (id == "dsl") return BurgersIc::Dsl;
  JFNK_REQUIRE(id == "4vc", "unknown burgers ic: " + id);
  return BurgersIc::FourVortex;
}

template <class T>
ReactionDiffusionIc rd_ic_kind(const std::string& id) {
  if (id == "gaussian") return ReactionDiffusionIc::Gaussian;
  if (id == "multigaussian") return ReactionDiffusionIc::MultiGaussian;
  JFNK_REQUIRE(id == "sinusoidal", "unknown rd ic: " + id);
  return ReactionDiffusionIc::Sinusoidal;
}

}  // namespace detail

// Test hook invoked after every accepted IBVP step; may mutate the state.
template <class T>
using StepHook = std::function<void(long step, StateVector<T>&)>;

template <class T>
RunRecord run_ibvp_t(const ProblemSpec& spec, JvpStrategy strategy, const KrylovConfig<T>& kcfg,
                     const NewtonConfig<T>& ncfg, long n_steps,
                     const StepHook<T>& hook = nullptr) {
  JFNK_REQUIRE(spec.problem != ProblemKind::MaxwellKerr, "run_ibvp: IBVP problems only");
  JFNK_REQUIRE(n_steps > 0, "run_ibvp: n_steps must be positive");

  RunRecord rec;
  rec.config.spec = spec;
  rec.config.jvp = strategy;
  rec.config.krylov = kcfg.method;
  rec.config.steps = static_cast<int>(n_steps);
  rec.config.tol_newton = static_cast<double>(ncfg.tol_newton);
  rec.config.tol_krylov = static_cast<double>(kcfg.rel_tol);

  const auto grid = detail::make_grid<T>(spec);
  const T courant = static_cast<T>(spec.courant);
  const T param = static_cast<T>(spec.param);
  StateVector<T> x;
  switch (spec.problem) {
    case ProblemKind::Burgers: x = burgers_ic(detail::burgers_ic_kind<T>(spec.ic), grid); break;
    case ProblemKind::SuOlson:
      x = spec.ic == "box" ? StateVector<T>(2 * grid.num_nodes(), T(0)) : su_olson_ic_rings(grid);
      break;
    default: {
      auto u = reaction_diffusion_ic(detail::rd_ic_kind<T>(spec.ic), grid);
      x = std::move(u);
      break;
    }
  }

  const T warn_tol = T(100) * ncfg.tol_newton;
  std::optional<FailureReason> hard;
  T t = T(0);

  const auto t0 = std::chrono::steady_clock::now();
  for (long step = 1; step <= n_steps; ++step) {
    T dt;
    NewtonReport<T> nrep;
    StateVector<T> x_new;
    switch (spec.problem) {
      case ProblemKind::Burgers: {
        dt = burgers_dt(cspan(x), param, grid, courant);
        BurgersResidual<T> f(grid, param, dt, x);
        std::tie(x_new, nrep) = newton_solve(f, cspan(x), cspan(x), strategy, kcfg, ncfg);
        break;
      }
      case ProblemKind::SuOlson: {
        dt = su_olson_dt(grid, param, courant);
        auto src = spec.ic == "box" ? SuOlsonSource::StaticBox : SuOlsonSource::OrbitingGaussian;
        auto q = su_olson_source(src, t + dt / T(2), grid);
        SuOlsonResidual<T> f(grid, param, dt, x, std::move(q));
        std::tie(x_new, nrep) = newton_solve(f, cspan(x), cspan(x), strategy, kcfg, ncfg);
        break;
      }
      default: {
        dt = reaction_diffusion_dt(param, grid, courant);
        ReactionDiffusionResidual<T> f(grid, param, dt, x);
        std::tie(x_new, nrep) = newton_solve(f, cspan(x), cspan(x), strategy, kcfg, ncfg);
        break;
      }
    }
    rec.steps_total = step;
    rec.newton_iters_total += nrep.iterations;
    rec.krylov_iters_total += nrep.krylov_iters_total;
    rec.backtracks_total += nrep.backtrack_count;
    rec.per_step_relres.push_back(static_cast<double>(nrep.final_relres));

    if (nrep.status == NewtonStatus::NonFinite || !all_finite(cspan(x_new))) {
      hard = FailureReason::NonFinite;
      break;
    }
    if (nrep.status == NewtonStatus::Breakdown) {
      hard = FailureReason::SolverBreakdown;
      break;
    }
    if (nrep.final_relres > warn_tol) ++rec.steps_unconverged;
    x = std::move(x_new);
    t += dt;
    if (hook) {
      hook(step, x);
      if (!all_finite(cspan(x))) {
        hard = FailureReason::NonFinite;
        break;
      }
    }
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  rec.status = classify(rec.steps_total, rec.steps_unconverged, hard);
  if (hard)
    rec.failure_reason = hard;
  else if (rec.status == RunStatus::Failed)
    rec.failure_reason = FailureReason::TooManyUnconvergedSteps;
  return rec;
}

template <class T>
RunRecord run_bvp_t(const ProblemSpec& spec, JvpStrategy strategy, const KrylovConfig<T>& kcfg,
                    const NewtonConfig<T>& ncfg, const std::vector<double>& omega_sweep) {
  JFNK_REQUIRE(spec.problem == ProblemKind::MaxwellKerr, "run_bvp: Maxwell only");
  JFNK_REQUIRE(!omega_sweep.empty(), "run_bvp: empty frequency sweep");

  RunRecord rec;
  rec.config.spec = spec;
  rec.config.jvp = strategy;
  rec.config.krylov = kcfg.method;
  rec.config.steps = 0;
  rec.config.omegas = omega_sweep;
  rec.config.tol_newton = static_cast<double>(ncfg.tol_newton);
  rec.config.tol_krylov = static_cast<double>(kcfg.rel_tol);

  const auto grid = detail::make_grid<T>(spec);
  const auto source_kind = spec.ic == "dipole" ? MaxwellSource::AntisymmetricDipole
                                               : MaxwellSource::SymmetricGaussian;
  const auto j = maxwell_source(source_kind, grid);
  std::optional<FailureReason> hard;

  const auto t0 = std::chrono::steady_clock::now();
  for (double omega : omega_sweep) {
    MaxwellParams<T> params;
    params.omega = static_cast<T>(omega);
    params.chi = static_cast<T>(spec.param);
    auto born = maxwell_born_guess(params, j, grid, kcfg);
    ++rec.steps_total;
    rec.krylov_iters_total += born.report.iterations;
    if (!born.report.converged || !all_finite(cspan(born.field))) {
      rec.per_step_relres.push_back(std::numeric_limits<double>::quiet_NaN());
      hard = all_finite(cspan(born.field)) ? FailureReason::SolverBreakdown
                                           : FailureReason::NonFinite;
      break;
    }

    MaxwellKerrResidual<T> f(grid, params, j);
    PreconditionerBuilder<T> cslp = [&params, &grid](std::span<const T> e) {
      return maxwell_cslp(params, e, grid);
    };
    auto [e, nrep] = newton_solve(f, cspan(born.field), cspan(born.field), strategy, kcfg, ncfg,
                                  cslp);
    rec.newton_iters_total += nrep.iterations;
    rec.krylov_iters_total += nrep.krylov_iters_total;
    rec.backtracks_total += nrep.backtrack_count;
    rec.per_step_relres.push_back(static_cast<double>(nrep.final_relres));
    if (nrep.status == NewtonStatus::NonFinite || !all_finite(cspan(e))) {
      hard = FailureReason::NonFinite;
      break;
    }
    if (nrep.status == NewtonStatus::Breakdown) {
      hard = FailureReason::SolverBreakdown;
      break;
    }
    // BVP steps must reach the full Newton tolerance.
    if (!(nrep.final_relres < ncfg.tol_newton)) ++rec.steps_unconverged;
  }
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  rec.status = classify(rec.steps_total, rec.steps_unconverged, hard);
  if (hard)
    rec.failure_reason = hard;
  else if (rec.status == RunStatus::Failed)
    rec.failure_reason = FailureReason::TooManyUnconvergedSteps;
  return rec;
}

// Runtime-precision dispatch.
inline RunRecord run_one(const RunConfig& cfg) {
  const bool bvp = cfg.spec.problem == ProblemKind::MaxwellKerr;
  if (cfg.spec.precision == Precision::FP32) {
    const auto k = detail::make_kcfg<float>(cfg);
    const auto n = detail::make_ncfg<float>(cfg, bvp);
    return bvp ? run_bvp_t<float>(cfg.spec, cfg.jvp, k, n, cfg.omegas)
               : run_ibvp_t<float>(cfg.spec, cfg.jvp, k, n, cfg.steps);
  }
  const auto k = detail::make_kcfg<double>(cfg);
  const auto n = detail::make_ncfg<double>(cfg, bvp);
  return bvp ? run_bvp_t<double>(cfg.spec, cfg.jvp, k, n, cfg.omegas)
             : run_ibvp_t<double>(cfg.spec, cfg.jvp, k, n, cfg.steps);
}

struct SweepSpec {
  std::vector<RunConfig> runs;
  std::uint64_t seed = 0;
};

// The paper's CPU sweep structure at desk scale: every (problem, ic, param)
// cell crossed with {FD, AD} x {FP32, FP64} x {GMRES, BiCGSTAB}, plus CG for
// the SPD reaction-diffusion problem.
inline SweepSpec cpu_desk_suite(int grid_n = 64, int steps = 200) {
  SweepSpec suite;
  struct Cell {
    ProblemKind problem;
    const char* ic;
    double param;
  };
  std::vector<Cell> cells;
  for (const char* ic : {"tgv", "dsl", "4vc"})
    for (double nu : {0.1, 0.05, 0.01}) cells.push_back({ProblemKind::Burgers, ic, nu});
  for (const char* ic : {"box", "orbit"})
    for (double xi : {1.0, 0.1, 0.01}) cells.push_back({ProblemKind::SuOlson, ic, xi});
  for (const char* ic : {"gaussian", "sinusoidal"})
    for (double d : {0.1, 0.01, 0.001}) cells.push_back({ProblemKind::ReactionDiffusion, ic, d});
  for (const char* ic : {"gaussian", "dipole"})
    for (double chi : {0.5, 0.1, 0.05}) cells.push_back({ProblemKind::MaxwellKerr, ic, chi});

  for (const auto& cell : cells)
    for (Precision prec : {Precision::FP32, Precision::FP64})
      for (JvpStrategy jvp : {JvpStrategy::FD, JvpStrategy::AD}) {
        std::vector<KrylovMethod> methods = {KrylovMethod::GMRES, KrylovMethod::BICGSTAB};
        if (cell.problem == ProblemKind::ReactionDiffusion)
          methods.push_back(KrylovMethod::CG);
        for (KrylovMethod m : methods) {
          RunConfig cfg;
          cfg.spec.problem = cell.problem;
          cfg.spec.ic = cell.ic;
          cfg.spec.param = cell.param;
          cfg.spec.grid_n = grid_n;
          cfg.spec.precision = prec;
          cfg.jvp = jvp;
          cfg.krylov = m;
          cfg.steps = steps;
          suite.runs.push_back(std::move(cfg));
        }
      }
  return suite;
}

inline std::vector<RunRecord> sweep(const SweepSpec& suite, int workers = 1,
                                    bool progress = false) {
  JFNK_REQUIRE(!suite.runs.empty(), "sweep: empty suite");
  for (const auto& cfg : suite.runs)
    JFNK_REQUIRE(cfg.krylov != KrylovMethod::CG ||
                     cfg.spec.problem == ProblemKind::ReactionDiffusion,
                 "sweep: CG applies only to the SPD reaction-diffusion problem");

  std::vector<RunRecord> records(suite.runs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= suite.runs.size()) return;
      records[i] = run_one(suite.runs[i]);
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress)
        std::fprintf(stderr, "[%zu/%zu] %s %s: %s\n", d, suite.runs.size(),
                     problem_id(records[i]).c_str(), solver_id(records[i]).c_str(),
                     to_string(records[i].status));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return records;
}

// --- JSONL serialization -------------------------------------------------

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{
      {"schema_version", kRecordSchemaVersion},
      {"problem", to_string(r.config.spec.problem)},
      {"ic", r.config.spec.ic},
      {"param", r.config.spec.param},
      {"grid", r.config.spec.grid_n},
      {"courant", r.config.spec.courant},
      {"precision", to_string(r.config.spec.precision)},
      {"jvp", to_string(r.config.jvp)},
      {"krylov", to_string(r.config.krylov)},
      {"steps", r.config.steps},
      {"omegas", r.config.omegas},
      {"tol_newton", r.config.tol_newton},
      {"tol_krylov", r.config.tol_krylov},
      {"wall_time_s", r.wall_time_s},
      {"newton_iters_total", r.newton_iters_total},
      {"krylov_iters_total", r.krylov_iters_total},
      {"steps_total", r.steps_total},
      {"steps_unconverged", r.steps_unconverged},
      {"backtracks_total", r.backtracks_total},
      {"status", to_string(r.status)},
      {"failure_reason",
       r.failure_reason ? nlohmann::json(to_string(*r.failure_reason)) : nlohmann::json()},
      {"per_step_relres", r.per_step_relres},
  };
}

inline ProblemKind problem_from_string(const std::string& s) {
  if (s == "burgers") return ProblemKind::Burgers;
  if (s == "suolson") return ProblemKind::SuOlson;
  if (s == "rd") return ProblemKind::ReactionDiffusion;
  JFNK_REQUIRE(s == "maxwell", "unknown problem: " + s);
  return ProblemKind::MaxwellKerr;
}

inline Precision precision_from_string(const std::string& s) {
  if (s == "fp32") return Precision::FP32;
  JFNK_REQUIRE(s == "fp64", "unknown precision: " + s);
  return Precision::FP64;
}

inline JvpStrategy jvp_from_string(const std::string& s) {
  if (s == "fd") return JvpStrategy::FD;
  JFNK_REQUIRE(s == "ad", "unknown jvp strategy: " + s);
  return JvpStrategy::AD;
}

inline KrylovMethod krylov_from_string(const std::string& s) {
  if (s == "gmres") return KrylovMethod::GMRES;
  if (s == "bicgstab") return KrylovMethod::BICGSTAB;
  JFNK_REQUIRE(s == "cg", "unknown krylov method: " + s);
  return KrylovMethod::CG;
}

inline RunStatus status_from_string(const std::string& s) {
  if (s == "converged") return RunStatus::Converged;
  if (s == "converged_with_warnings") return RunStatus::ConvergedWithWarnings;
  JFNK_REQUIRE(s == "failed", "unknown status: " + s);
  return RunStatus::Failed;
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  r.config.spec.problem = problem_from_string(j.at("problem").get<std::string>());
  r.config.spec.ic = j.at("ic").get<std::string>();
  r.config.spec.param = j.at("param").get<double>();
  r.config.spec.grid_n = j.at("grid").get<int>();
  r.config.spec.courant = j.at("courant").get<double>();
  r.config.spec.precision = precision_from_string(j.at("precision").get<std::string>());
  r.config.jvp = jvp_from_string(j.at("jvp").get<std::string>());
  r.config.krylov = krylov_from_string(j.at("krylov").get<std::string>());
  r.config.steps = j.at("steps").get<int>();
  r.config.omegas = j.at("omegas").get<std::vector<double>>();
  r.config.tol_newton = j.at("tol_newton").get<double>();
  r.config.tol_krylov = j.at("tol_krylov").get<double>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.newton_iters_total = j.at("newton_iters_total").get<long>();
  r.krylov_iters_total = j.at("krylov_iters_total").get<long>();
  r.steps_total = j.at("steps_total").get<long>();
  r.steps_unconverged = j.at("steps_unconverged").get<long>();
  r.backtracks_total = j.at("backtracks_total").get<long>();
  r.status = status_from_string(j.at("status").get<std::string>());
  const auto& fr = j.at("failure_reason");
  if (fr.is_null()) {
    r.failure_reason.reset();
  } else {
    const auto s = fr.get<std::string>();
    r.failure_reason = s == "non_finite" ? FailureReason::NonFinite
                       : s == "solver_breakdown" ? FailureReason::SolverBreakdown
                                                 : FailureReason::TooManyUnconvergedSteps;
  }
  r.per_step_relres = j.at("per_step_relres").get<std::vector<double>>();
}

inline void append_records_jsonl(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::app);
  JFNK_REQUIRE(out.good(), "cannot open for append: " + path);
  for (const auto& r : records) {
    nlohmann::json j = r;
    out << j.dump() << '\n';
  }
}

inline std::vector<RunRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  JFNK_REQUIRE(in.good(), "cannot open: " + path);
  std::vector<RunRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(nlohmann::json::parse(line).get<RunRecord>());
  }
  return records;
}

}  // namespace jfnk
