// Command-line front end: single runs, suite sweeps, verification studies,
// and performance-profile post-processing over JSONL run records.
// Exit code 0 unless a contract violation occurs; solver failures are data.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jfnk/jfnk.hpp"
#include "jfnk/studies.hpp"

namespace {

std::vector<double> parse_omegas(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

jfnk::SweepSpec load_suite_file(const std::string& path, int grid_n, int steps) {
  std::ifstream in(path);
  JFNK_REQUIRE(in.good(), "cannot open suite file: " + path);
  nlohmann::json j;
  in >> j;
  jfnk::SweepSpec suite;
  suite.seed = j.value("seed", 0u);
  for (const auto& rj : j.at("runs")) {
    jfnk::RunConfig cfg;
    cfg.spec.problem = jfnk::problem_from_string(rj.at("problem").get<std::string>());
    cfg.spec.ic = rj.at("ic").get<std::string>();
    cfg.spec.param = rj.at("param").get<double>();
    cfg.spec.grid_n = rj.value("grid", grid_n);
    cfg.spec.courant = rj.value("courant", 1.0);
    cfg.spec.precision = jfnk::precision_from_string(rj.value("precision", "fp64"));
    cfg.jvp = jfnk::jvp_from_string(rj.value("jvp", "ad"));
    cfg.krylov = jfnk::krylov_from_string(rj.value("krylov", "gmres"));
    cfg.steps = rj.value("steps", steps);
    if (rj.contains("omegas")) cfg.omegas = rj.at("omegas").get<std::vector<double>>();
    suite.runs.push_back(std::move(cfg));
  }
  return suite;
}

void print_record_summary(const jfnk::RunRecord& rec) {
  std::printf("%s  %s  status=%s", jfnk::problem_id(rec).c_str(), jfnk::solver_id(rec).c_str(),
              jfnk::to_string(rec.status));
  if (rec.failure_reason) std::printf(" (%s)", jfnk::to_string(*rec.failure_reason));
  std::printf("\n  steps=%ld unconverged=%ld newton=%ld krylov=%ld backtracks=%ld time=%.3fs\n",
              rec.steps_total, rec.steps_unconverged, rec.newton_iters_total,
              rec.krylov_iters_total, rec.backtracks_total, rec.wall_time_s);
}

int cmd_verify(const std::string& study) {
  if (study == "jvp-oracle") {
    std::printf("JVP oracle study (8x8, FP64): AD vs dense-assembled Jacobian, FD vs AD\n");
    for (const auto& r : jfnk::jvp_oracle_study()) {
      std::printf("  %-8s  ad_vs_dense=%.3e  fd_vs_ad=%.3e\n", r.problem.c_str(), r.ad_vs_dense,
                  r.fd_vs_ad);
    }
    return 0;
  }
  if (study == "spatial-convergence") {
    std::printf("Burgers TGV spatial convergence (nu=0.05, AD-FP64, 128x128 reference)\n");
    const auto res = jfnk::spatial_convergence_study();
    for (std::size_t i = 0; i < res.grids.size(); ++i)
      std::printf("  n=%-4d rms error=%.6e\n", res.grids[i], res.errors[i]);
    std::printf("  observed order: %.3f\n", res.observed_order);
    return 0;
  }
  JFNK_REQUIRE(study == "energy-balance", "unknown study: " + study);
  const auto res = jfnk::energy_balance_study();
  std::printf("Su-Olson discrete energy balance (periodic mode, one CN step)\n");
  std::printf("  defect=%.6e  bound=%.6e  final_relres=%.3e\n", res.defect, res.bound,
              res.final_relres);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-free Newton-Krylov benchmark harness (FD vs forward-mode AD JVPs)"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one solver configuration");
  std::string problem = "burgers", ic = "tgv", precision = "fp64", jvp = "ad",
              krylov = "gmres", out_path, omegas_csv = "14,15,16,17,18";
  double param = 0.1, courant = 1.0, tol_newton = 0, tol_krylov = 0;
  int grid_n = 64, steps = 200;
  run->add_option("--problem", problem, "burgers|suolson|rd|maxwell");
  run->add_option("--ic", ic, "initial condition / source id");
  run->add_option("--param", param, "physical parameter (nu|xi|D|chi)");
  run->add_option("--grid", grid_n, "grid points per side");
  run->add_option("--precision", precision, "fp32|fp64");
  run->add_option("--jvp", jvp, "fd|ad");
  run->add_option("--krylov", krylov, "gmres|bicgstab|cg");
  run->add_option("--steps", steps, "time steps (IBVP)");
  run->add_option("--omegas", omegas_csv, "frequency sweep (maxwell)");
  run->add_option("--courant", courant, "Courant number");
  run->add_option("--tol-newton", tol_newton, "override Newton tolerance");
  run->add_option("--tol-krylov", tol_krylov, "override Krylov tolerance");
  run->add_option("--out", out_path, "append run record (JSON Lines)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a benchmark suite");
  std::string suite_id = "cpu-desk", sweep_out;
  int workers = 1, sweep_grid = 64, sweep_steps = 200;
  bool progress = false;
  sweep_cmd->add_option("--suite", suite_id, "cpu-desk or a JSON suite file");
  sweep_cmd->add_option("--out", sweep_out, "append run records (JSON Lines)");
  sweep_cmd->add_option("--workers", workers, "concurrent runs (1 for timing fidelity)");
  sweep_cmd->add_option("--grid", sweep_grid, "grid for cpu-desk");
  sweep_cmd->add_option("--steps", sweep_steps, "steps for cpu-desk IBVPs");
  sweep_cmd->add_flag("--progress", progress, "print per-run progress");

  // verify
  auto* verify = app.add_subcommand("verify", "Verification studies");
  std::string study = "jvp-oracle";
  verify->add_option("--study", study, "spatial-convergence|jvp-oracle|energy-balance");

  // profile
  auto* prof = app.add_subcommand("profile", "Dolan-More performance profiles");
  std::string prof_in, prof_metric = "time", prof_out = "profile.csv", prof_svg;
  prof->add_option("--in", prof_in, "run records (JSON Lines)")->required();
  prof->add_option("--metric", prof_metric, "time|iters");
  prof->add_option("--out", prof_out, "profile CSV output");
  prof->add_option("--svg", prof_svg, "optional SVG step plot");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      jfnk::RunConfig cfg;
      cfg.spec.problem = jfnk::problem_from_string(problem);
      cfg.spec.ic = ic;
      cfg.spec.param = param;
      cfg.spec.grid_n = grid_n;
      cfg.spec.courant = courant;
      cfg.spec.precision = jfnk::precision_from_string(precision);
      cfg.jvp = jfnk::jvp_from_string(jvp);
      cfg.krylov = jfnk::krylov_from_string(krylov);
      cfg.steps = steps;
      cfg.omegas = parse_omegas(omegas_csv);
      cfg.tol_newton = tol_newton;
      cfg.tol_krylov = tol_krylov;
      const auto rec = jfnk::run_one(cfg);
      print_record_summary(rec);
      if (!out_path.empty()) jfnk::append_records_jsonl(out_path, {rec});
      return 0;
    }
    if (*sweep_cmd) {
      const auto suite = suite_id == "cpu-desk"
                             ? jfnk::cpu_desk_suite(sweep_grid, sweep_steps)
                             : load_suite_file(suite_id, sweep_grid, sweep_steps);
      const auto records = jfnk::sweep(suite, workers, progress);
      long failed = 0;
      for (const auto& r : records) failed += r.status == jfnk::RunStatus::Failed;
      std::printf("sweep complete: %zu runs, %ld failed\n", records.size(), failed);
      if (!sweep_out.empty()) jfnk::append_records_jsonl(sweep_out, records);
      return 0;
    }
    if (*verify) return cmd_verify(study);
    if (*prof) {
      const auto records = jfnk::read_records_jsonl(prof_in);
      const auto metric = prof_metric == "time" ? jfnk::ProfileMetric::Time
                                                : jfnk::ProfileMetric::KrylovIters;
      const auto table = jfnk::perf_ratios(records, metric);
      for (const auto& p : table.problems_without_success)
        std::fprintf(stderr, "warning: no successful solver for %s\n", p.c_str());
      const auto curves = jfnk::profile(table, jfnk::default_tau_grid());
      jfnk::write_profile_csv(prof_out, curves);
      if (!prof_svg.empty()) jfnk::write_profile_svg(prof_svg, curves, metric);
      std::printf("wrote %s (%zu solvers, %zu problems)\n", prof_out.c_str(),
                  table.solvers.size(), table.problems.size());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
