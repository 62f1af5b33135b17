#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "jfnk/harness.hpp"
#include "jfnk/numerics.hpp"

// Dolan-More performance profiles over run records: per-problem performance
// ratios r_{p,s} = t_{p,s} / min_s t_{p,s} (failed runs get +inf) and the
// cumulative curves rho_s(tau) = |{p : r_{p,s} <= tau}| / |P|.

namespace jfnk {

enum class ProfileMetric { Time, KrylovIters };

inline const char* to_string(ProfileMetric m) {
  return m == ProfileMetric::Time ? "time" : "iters";
}

struct RatioTable {
  std::vector<std::string> problems;                  // row labels
  std::vector<std::string> solvers;                   // column labels
  std::vector<std::vector<double>> ratios;            // [problem][solver]
  std::vector<std::string> problems_without_success;  // flagged rows (all +inf)
};

struct ProfileCurve {
  std::string solver_id;
  std::vector<double> tau_samples;
  std::vector<double> rho_values;
};

inline double profile_metric_value(const RunRecord& r, ProfileMetric metric) {
  return metric == ProfileMetric::Time ? r.wall_time_s
                                       : static_cast<double>(r.krylov_iters_total);
}

inline RatioTable perf_ratios(const std::vector<RunRecord>& records, ProfileMetric metric) {
  JFNK_REQUIRE(!records.empty(), "perf_ratios: no records");
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::map<std::string, std::map<std::string, const RunRecord*>> table;
  std::map<std::string, int> solver_set;
  for (const auto& r : records) {
    auto& cell = table[problem_id(r)][solver_id(r)];
    JFNK_REQUIRE(cell == nullptr, "perf_ratios: duplicate record for " + problem_id(r) + " / " +
                                      solver_id(r));
    cell = &r;
    solver_set[solver_id(r)] = 1;
  }

  RatioTable out;
  for (const auto& [s, _] : solver_set) out.solvers.push_back(s);
  for (const auto& [p, row] : table) {
    out.problems.push_back(p);
    double best = inf;
    for (const auto& [s, rec] : row)
      if (rec->status != RunStatus::Failed)
        best = std::min(best, profile_metric_value(*rec, metric));
    std::vector<double> ratios(out.solvers.size(), inf);
    if (!std::isfinite(best)) {
      out.problems_without_success.push_back(p);
    } else {
      for (std::size_t j = 0; j < out.solvers.size(); ++j) {
        const auto it = row.find(out.solvers[j]);
        if (it == row.end() || it->second->status == RunStatus::Failed) continue;
        const double t = profile_metric_value(*it->second, metric);
        ratios[j] = best > 0 ? t / best : (t == 0 ? 1.0 : inf);
      }
    }
    out.ratios.push_back(std::move(ratios));
  }
  return out;
}

inline std::vector<double> default_tau_grid(int count = 64, double tau_max = 1e4) {
  std::vector<double> taus(count);
  for (int i = 0; i < count; ++i)
    taus[i] = std::pow(10.0, std::log10(tau_max) * i / (count - 1));
  taus.front() = 1.0;
  return taus;
}

inline std::vector<ProfileCurve> profile(const RatioTable& table,
                                         const std::vector<double>& taus) {
  JFNK_REQUIRE(!taus.empty() && taus.front() >= 1.0, "profile: taus must start at >= 1");
  JFNK_REQUIRE(std::is_sorted(taus.begin(), taus.end()), "profile: taus must be sorted");
  const double np = static_cast<double>(table.problems.size());
  std::vector<ProfileCurve> curves;
  for (std::size_t j = 0; j < table.solvers.size(); ++j) {
    ProfileCurve c;
    c.solver_id = table.solvers[j];
    c.tau_samples = taus;
    for (double tau : taus) {
      long count = 0;
      for (const auto& row : table.ratios)
        if (row[j] <= tau) ++count;
      c.rho_values.push_back(np > 0 ? count / np : 0.0);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

inline void write_profile_csv(const std::string& path, const std::vector<ProfileCurve>& curves) {
  std::ofstream out(path);
  JFNK_REQUIRE(out.good(), "cannot open for write: " + path);
  out << "solver_id,tau,rho\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.tau_samples.size(); ++i)
      out << c.solver_id << ',' << c.tau_samples[i] << ',' << c.rho_values[i] << '\n';
}

// Static SVG step plot, log tau on the x axis.
inline void write_profile_svg(const std::string& path, const std::vector<ProfileCurve>& curves,
                              ProfileMetric metric) {
  std::ofstream out(path);
  JFNK_REQUIRE(out.good(), "cannot open for write: " + path);
  const double width = 760, height = 480;
  const double left = 70, right = 210, top = 30, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double tau_max = 10.0;
  for (const auto& c : curves)
    if (!c.tau_samples.empty()) tau_max = std::max(tau_max, c.tau_samples.back());
  const double lmax = std::log10(tau_max);
  const auto xf = [&](double tau) { return left + pw * std::log10(std::max(tau, 1.0)) / lmax; };
  const auto yf = [&](double rho) { return top + ph * (1.0 - rho); };
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf", "#000000", "#aec7e8"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = 0; d <= static_cast<int>(lmax + 0.5); ++d) {
    const double x = xf(std::pow(10.0, d));
    out << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\""
        << top + ph << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << top + ph + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double rho = i / 5.0;
    out << "<text x=\"" << left - 8 << "\" y=\"" << yf(rho) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << rho << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">tau ("
      << (metric == ProfileMetric::Time ? "wall time" : "Krylov iterations")
      << " ratio)</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\" text-anchor=\"middle\">rho(tau)</text>\n";

  int color = 0;
  for (const auto& c : curves) {
    const char* stroke = palette[color % 12];
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.6\" points=\"";
    double prev_y = yf(0.0);
    for (std::size_t i = 0; i < c.tau_samples.size(); ++i) {
      const double x = xf(c.tau_samples[i]);
      out << x << ',' << prev_y << ' ';
      prev_y = yf(c.rho_values[i]);
      out << x << ',' << prev_y << ' ';
    }
    out << xf(tau_max) << ',' << prev_y << "\"/>\n";
    const double ly = top + 16 + 16 * color;
    out << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
        << c.solver_id << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

}  // namespace jfnk
