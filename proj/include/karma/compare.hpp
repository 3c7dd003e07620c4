#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "karma/equilibrium.hpp"
#include "karma/io.hpp"
#include "karma/lp.hpp"
#include "karma/simulator.hpp"

namespace karma {

struct MechanismSummary {
  MechanismKind mechanism = MechanismKind::kRandom;
  std::vector<MetricsReport> runs;
  double r_bar = 0.0;
  double beta = 0.0;
  /// Standard errors of the means across replications (0 for one run).
  double r_bar_se = 0.0;
  double beta_se = 0.0;
};

struct ComparisonReport {
  std::vector<MechanismSummary> mechanisms;
  LpSolution lp;
};

/// Mean and standard error of the mean (sample standard deviation / sqrt(n)).
inline std::pair<double, double> mean_and_se(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(x.size()))};
}

/// Simulates one mechanism over `config.replications` seeds
/// rng_seed, rng_seed + 1, ...; every mechanism uses the same seed list.
inline MechanismSummary simulate_replications(const GameConfig& config, const Mechanism& mechanism) {
  MechanismSummary out;
  out.mechanism = mechanism.kind();
  std::vector<double> r, b;
  for (int rep = 0; rep < config.replications; ++rep) {
    GameConfig c = config;
    c.rng_seed = config.rng_seed + static_cast<std::uint64_t>(rep);
    out.runs.push_back(run_experiment(c, mechanism));
    r.push_back(out.runs.back().r_bar);
    b.push_back(out.runs.back().beta);
  }
  std::tie(out.r_bar, out.r_bar_se) = mean_and_se(r);
  std::tie(out.beta, out.beta_se) = mean_and_se(b);
  return out;
}

/// KARMA at the supplied equilibrium, RANDOM, TURN and GREEDY_URGENCY with
/// common seeds, plus the efficiency LP bound.
inline ComparisonReport run_comparison(const GameConfig& config, const EquilibriumResult& equilibrium) {
  ComparisonReport report;
  report.lp = solve_lp(build_max_eff_lp(config.process()));
  for (const Mechanism& m : {Mechanism::karma(equilibrium), Mechanism::random(), Mechanism::turn(),
                             Mechanism::greedy_urgency()}) {
    report.mechanisms.push_back(simulate_replications(config, m));
    for (auto& run : report.mechanisms.back().runs) run.lp_bound = report.lp.value;
  }
  return report;
}

inline std::string comparison_csv(const ComparisonReport& report) {
  std::string s = "mechanism,r_bar,beta,r_bar_se,beta_se,replications\n";
  for (const auto& m : report.mechanisms) {
    s += std::string(to_string(m.mechanism)) + "," + format_double(m.r_bar) + "," +
         format_double(m.beta) + "," + format_double(m.r_bar_se) + "," + format_double(m.beta_se) +
         "," + std::to_string(m.runs.size()) + "\n";
  }
  s += "max_eff_lp," + format_double(report.lp.value) + ",,,,\n";
  return s;
}

inline Json comparison_json(const ComparisonReport& report) {
  Json rows = Json::array();
  for (const auto& m : report.mechanisms) {
    rows.push_back({{"mechanism", std::string(to_string(m.mechanism))},
                    {"r_bar", m.r_bar},
                    {"beta", m.beta},
                    {"r_bar_se", m.r_bar_se},
                    {"beta_se", m.beta_se},
                    {"replications", m.runs.size()}});
  }
  return Json{{"mechanisms", rows}, {"lp_bound", report.lp.value}};
}

inline Json lp_json(const LpSolution& sol, const UrgencyProcess* process, double residual) {
  Json psi = Json::array();
  for (std::size_t j = 0; j < sol.x.size(); ++j) {
    if (process) {
      psi.push_back({{"urgency_level", process->level(j / 2)},
                     {"outcome", static_cast<int>(j % 2)},
                     {"value", sol.x[j]}});
    } else {
      psi.push_back(sol.x[j]);
    }
  }
  return Json{{"r_bar_max", sol.value}, {"psi", psi}, {"constraint_residual", residual}};
}

}  // namespace karma
