// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "karma/karma.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace karma;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KARMA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Largest one-shot Q gain over all states, from brute-force value iteration.
double exhaustive_deviation(const Game& g, const SocialState& s) {
  const auto ker = oracle::kernel(g.process(), s);
  const auto V = oracle::value_iteration(ker, g.alpha());
  double worst = 0.0;
  for (std::size_t i = 0; i < s.n_states(); ++i) {
    const auto [u, k] = s.state_at(i);
    std::vector<double> q(static_cast<std::size_t>(k) + 1);
    double on_policy = 0.0;
    for (int b = 0; b <= k; ++b) {
      q[static_cast<std::size_t>(b)] = oracle::q_value(g.process(), s, V, g.alpha(), u, k, b);
      on_policy += s.policy(u, k)[static_cast<std::size_t>(b)] * q[static_cast<std::size_t>(b)];
    }
    for (double x : q) worst = std::max(worst, x - on_policy);
  }
  return worst;
}

/// Long-run RANDOM reward: stationary urgency of the half-win chain by power
/// iteration, each interaction lost with probability one half.
double random_oracle(const UrgencyProcess& proc) {
  const auto mu = oracle::power_iteration(proc.mixture(0.5));
  double r = 0.0;
  for (std::size_t u = 0; u < proc.size(); ++u) r -= 0.5 * mu[u] * proc.level(u);
  return r;
}

const MechanismSummary& find(const ComparisonReport& rep, MechanismKind kind) {
  for (const auto& m : rep.mechanisms)
    if (m.mechanism == kind) return m;
  throw std::logic_error("mechanism missing from comparison");
}

}  // namespace

int main() {
  GameConfig cfg;
  cfg.replications = 5;
  const Game game(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const EquilibriumResult eq = solve_sne(game, SolverConfig{});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& s = eq.social;

  report(1, eq.converged && eq.iterations <= 2000 && eq.final_exploitability() <= 1e-4 &&
                eq.final_stationarity() <= 1e-6,
         fmt("converged in %.0f iterations (%.1f s), exploitability %.3g, stationarity %.3g",
             eq.iterations, seconds, eq.final_exploitability(), eq.final_stationarity()));

  double top_mass = 0.0;
  for (int u = 0; u < s.n_urgency(); ++u)
    for (int k = 38; k <= s.k_max(); ++k) top_mass += s.mass(u, k);
  report(2, std::abs(s.mean_karma() - 10.0) <= 0.01 && top_mass < 1e-3,
         fmt("mean karma %.6f, mass at k >= 38 %.3g", s.mean_karma(), top_mass));

  double violation = 0.0;
  for (int k = 0; k <= s.k_max(); ++k) {
    for (int u = 1; u < s.n_urgency(); ++u) {
      if (s.mass(u, k) <= 1e-4 || s.mass(u - 1, k) <= 1e-4) continue;
      violation = std::max(violation, s.expected_bid(u - 1, k) - s.expected_bid(u, k));
    }
  }
  report(3, violation <= 1e-6, fmt("largest decrease of expected bid in urgency %.3g", violation));

  {
    GameConfig small;
    small.urgency_levels = {1, 16};
    small.k_bar = 2;
    small.k_max = 6;
    const Game g(small);
    const auto r = solve_sne(g, SolverConfig{});
    const double gain = exhaustive_deviation(g, r.social);
    report(4, gain <= 1e-4, fmt("best deterministic deviation gains %.3g (converged=%.0f)", gain, r.converged));
  }

  {
    const double ref = random_oracle(game.process());
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      GameConfig c = cfg;
      c.rng_seed = cfg.rng_seed + static_cast<std::uint64_t>(rep);
      const auto m = run_experiment(c, Mechanism::random());
      worst = std::max(worst, std::abs(m.r_bar - ref) / std::abs(ref));
    }
    report(5, worst <= 0.02, fmt("oracle %.5f, worst relative error over 5 seeds %.4f", ref, worst));
  }

  const ComparisonReport cmp = run_comparison(cfg, eq);
  {
    const auto lp = build_max_eff_lp(game.process());
    const auto vert = oracle::enumerate_vertices(lp);
    const double gap = std::abs(cmp.lp.value - vert.value);
    bool bound = true;
    for (const auto& m : cmp.mechanisms)
      for (const auto& run : m.runs) bound = bound && cmp.lp.value >= run.r_bar - 0.02 * std::abs(run.r_bar);
    report(6, gap <= 1e-8 && bound,
           fmt("LP %.6f, vertex oracle %.6f, gap %.3g, bounds every run: %.0f", cmp.lp.value, vert.value, gap,
               bound));
  }

  {
    const auto& k = find(cmp, MechanismKind::kKarma);
    const auto& r = find(cmp, MechanismKind::kRandom);
    const auto& t = find(cmp, MechanismKind::kTurn);
    // Standard error of a difference of independent means.
    const auto margin = [](double x, double y, double sx, double sy) { return x - y > 3.0 * std::hypot(sx, sy); };
    const bool over_turn = margin(k.r_bar, t.r_bar, k.r_bar_se, t.r_bar_se);
    const bool over_random = margin(k.r_bar, r.r_bar, k.r_bar_se, r.r_bar_se);
    const bool fairer = margin(k.beta, r.beta, k.beta_se, r.beta_se);
    report(7, over_turn && over_random,
           fmt("efficiency: KARMA %.4f, TURN %.4f, RANDOM %.4f (3 SE margins: %.0f)", k.r_bar, t.r_bar, r.r_bar,
               over_turn && over_random));
    report(7, fairer, fmt("fairness: beta KARMA %.4f vs RANDOM %.4f", k.beta, r.beta));
    report(7, k.r_bar >= 0.9 * cmp.lp.value,
           fmt("near MAX_EFF: KARMA %.4f vs 0.9 * LP %.4f (LP / KARMA = %.3f)", k.r_bar, 0.9 * cmp.lp.value,
               cmp.lp.value / k.r_bar));
  }

  {
    bool exact = true;
    std::size_t rounds = 0;
    const auto expected = static_cast<std::int64_t>(cfg.n_agents) * cfg.k_bar;
    for (const auto& run : find(cmp, MechanismKind::kKarma).runs) {
      for (auto total : run.karma_totals) exact = exact && total == expected;
      rounds += run.karma_totals.size();
    }
    report(8, exact && rounds > 0, fmt("%.0f KARMA rounds checked against N * k_bar = %.0f", rounds, expected));
  }

  {
    const fs::path dir = fs::temp_directory_path() / "karma_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.cfg") << "replications = 2\nn_rounds = 300\n";
    const int a = run_cli("compare --config " + (dir / "run.cfg").string() + " --out " + (dir / "a").string());
    const int b = run_cli("compare --manifest " + (dir / "a" / "manifest.json").string() + " --out " +
                          (dir / "b").string());
    const std::string csv_a = slurp(dir / "a" / "comparison.csv");
    const std::string csv_b = slurp(dir / "b" / "comparison.csv");
    report(9, a == 0 && b == 0 && !csv_a.empty() && csv_a == csv_b,
           fmt("exit codes %.0f/%.0f, %.0f-byte CSVs identical: %.0f", a, b, csv_a.size(), csv_a == csv_b));
  }

  std::printf("%d criterion check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
