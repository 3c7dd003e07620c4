// karma: solve, simulate and benchmark the karma ride-hailing economy.
//
//   karma solve    --config c.cfg --out dir
//   karma simulate --config c.cfg --mechanism karma --out dir
//   karma compare  --config c.cfg --out dir
//   karma lp       --config c.cfg
//
// Exit codes: 0 success, 2 usage/config error, 3 non-convergence or solver
// failure, 4 I/O error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "karma/karma.hpp"

namespace fs = std::filesystem;
using namespace karma;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string config_path;
  std::string manifest_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string mechanism;
  std::string problem_path;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunConfig resolve_config(const Options& opt) {
  RunConfig rc;
  if (!opt.manifest_path.empty()) {
    rc = load_manifest(opt.manifest_path).config;
  } else if (!opt.config_path.empty()) {
    rc = load_config(opt.config_path);
  }
  if (opt.seed) rc.game.rng_seed = *opt.seed;
  rc.game.validate();
  rc.solver.validate();
  return rc;
}

fs::path prepare_out(const Options& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + opt.out_dir + "'");
  return dir;
}

void write_output(RunManifest& manifest, const fs::path& dir, const std::string& name,
                  const std::string& text) {
  write_text((dir / name).string(), text);
  manifest.outputs.push_back(name);
}

void finish_manifest(RunManifest& manifest, const fs::path& dir) {
  manifest.outputs.push_back("manifest.json");
  write_text((dir / "manifest.json").string(), Json(manifest).dump(2) + "\n");
}

RunManifest start_manifest(const std::string& command, const RunConfig& rc) {
  RunManifest m;
  m.command = command;
  m.config = rc;
  m.seed = rc.game.rng_seed;
  return m;
}

int cmd_solve(const Options& opt) {
  const RunConfig rc = resolve_config(opt);
  const fs::path dir = prepare_out(opt);
  RunManifest manifest = start_manifest("solve", rc);
  const Game game(rc.game);
  Stopwatch clock;
  const EquilibriumResult eq = solve_sne(game, rc.solver);
  manifest.timings_seconds["solve"] = clock.seconds();

  if (opt.format == "json") {
    write_output(manifest, dir, "equilibrium.json", equilibrium_json(eq, game.process()).dump(2) + "\n");
  } else {
    write_output(manifest, dir, "policy.csv", policy_csv(eq.social, game.process()));
    write_output(manifest, dir, "distribution.csv", distribution_csv(eq.social, game.process()));
  }
  write_output(manifest, dir, "residuals.csv", residuals_csv(eq));
  const Json summary = equilibrium_summary(eq);
  write_output(manifest, dir, "summary.json", summary.dump(2) + "\n");
  finish_manifest(manifest, dir);

  Json brief = summary;
  brief.erase("residuals");
  std::cout << brief.dump(2) << "\n";
  if (!eq.converged) {
    std::cerr << "solve: no convergence after " << eq.iterations << " iterations (exploitability "
              << format_double(eq.final_exploitability()) << ", stationarity "
              << format_double(eq.final_stationarity()) << ")\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

std::optional<EquilibriumResult> solve_for_karma(const RunConfig& rc, RunManifest& manifest) {
  Stopwatch clock;
  EquilibriumResult eq = solve_sne(Game(rc.game), rc.solver);
  manifest.timings_seconds["solve"] = clock.seconds();
  if (!eq.converged) {
    std::cerr << "equilibrium did not converge (exploitability "
              << format_double(eq.final_exploitability()) << ")\n";
    return std::nullopt;
  }
  return eq;
}

int cmd_simulate(const Options& opt) {
  const RunConfig rc = resolve_config(opt);
  const MechanismKind kind = parse_mechanism(opt.mechanism);
  const fs::path dir = prepare_out(opt);
  RunManifest manifest = start_manifest("simulate", rc);
  manifest.mechanisms.emplace_back(to_string(kind));

  std::optional<Mechanism> mechanism;
  switch (kind) {
    case MechanismKind::kKarma: {
      const auto eq = solve_for_karma(rc, manifest);
      if (!eq) return kExitNoConvergence;
      mechanism = Mechanism::karma(*eq);
      break;
    }
    case MechanismKind::kRandom: mechanism = Mechanism::random(); break;
    case MechanismKind::kTurn: mechanism = Mechanism::turn(); break;
    case MechanismKind::kGreedyUrgency: mechanism = Mechanism::greedy_urgency(); break;
  }
  Stopwatch clock;
  MetricsReport report = run_experiment(rc.game, *mechanism);
  report.lp_bound = solve_lp(build_max_eff_lp(rc.game.process())).value;
  manifest.timings_seconds["simulate"] = clock.seconds();

  const Json metrics = metrics_json(report);
  write_output(manifest, dir, "metrics.json", metrics.dump(2) + "\n");
  write_output(manifest, dir, "round_trace.csv", round_trace_csv(report, rc.game.burn_in));
  if (kind == MechanismKind::kKarma) {
    write_output(manifest, dir, "karma_histogram.csv", karma_histogram_csv(report, rc.game.burn_in));
  }
  finish_manifest(manifest, dir);

  if (opt.format == "json") {
    Json brief = metrics;
    brief.erase("agent_average_reward");
    std::cout << brief.dump(2) << "\n";
  } else {
    std::cout << "mechanism,r_bar,beta\n"
              << to_string(kind) << "," << format_double(report.r_bar) << ","
              << format_double(report.beta) << "\n";
  }
  return kExitOk;
}

int cmd_compare(const Options& opt) {
  const RunConfig rc = resolve_config(opt);
  const fs::path dir = prepare_out(opt);
  RunManifest manifest = start_manifest("compare", rc);
  manifest.mechanisms = {"karma", "random", "turn", "greedy_urgency", "max_eff_lp"};
  const auto eq = solve_for_karma(rc, manifest);
  if (!eq) return kExitNoConvergence;
  Stopwatch clock;
  const ComparisonReport report = run_comparison(rc.game, *eq);
  manifest.timings_seconds["simulate"] = clock.seconds();

  const std::string csv = comparison_csv(report);
  write_output(manifest, dir, "comparison.csv", csv);
  if (opt.format == "json") {
    const std::string js = comparison_json(report).dump(2) + "\n";
    write_output(manifest, dir, "comparison.json", js);
    std::cout << js;
  } else {
    std::cout << csv;
  }
  finish_manifest(manifest, dir);
  return kExitOk;
}

int cmd_lp(const Options& opt) {
  if (!opt.problem_path.empty()) {
    std::ifstream in(opt.problem_path);
    if (!in) throw IoError("cannot open LP problem file '" + opt.problem_path + "'");
    LpProblem problem;
    try {
      const Json j = Json::parse(in);
      j.at("objective").get_to(problem.objective);
      j.at("A").get_to(problem.A);
      j.at("rhs").get_to(problem.rhs);
    } catch (const Json::exception& e) {
      throw ParameterError("problem", e.what());
    }
    const LpSolution sol = solve_lp(problem);
    std::cout << lp_json(sol, nullptr, problem.residual(sol.x)).dump(2) << "\n";
    return kExitOk;
  }
  const RunConfig rc = resolve_config(opt);
  const UrgencyProcess process = rc.game.process();
  const LpProblem problem = build_max_eff_lp(process);
  const LpSolution sol = solve_lp(problem);
  const std::string js = lp_json(sol, &process, problem.residual(sol.x)).dump(2) + "\n";
  std::cout << js;
  if (!opt.out_dir.empty() && opt.out_dir != ".") {
    const fs::path dir = prepare_out(opt);
    RunManifest manifest = start_manifest("lp", rc);
    manifest.mechanisms = {"max_eff_lp"};
    write_output(manifest, dir, "lp.json", js);
    finish_manifest(manifest, dir);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Karma economy for ride-hailing allocation"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "Configuration file (key = value lines)");
    sub->add_option("--manifest", opt.manifest_path, "Rerun from a manifest.json");
    sub->add_option("--seed", opt.seed, "Override rng_seed");
    sub->add_option("--out", opt.out_dir, "Output directory");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* solve = app.add_subcommand("solve", "Compute the stationary Nash equilibrium");
  add_common(solve);
  auto* simulate = app.add_subcommand("simulate", "Simulate one mechanism");
  add_common(simulate);
  simulate->add_option("--mechanism", opt.mechanism, "karma, random, turn or greedy_urgency")
      ->required();
  auto* compare = app.add_subcommand("compare", "Benchmark all mechanisms against the LP bound");
  add_common(compare);
  auto* lp = app.add_subcommand("lp", "Solve the efficiency upper-bound LP");
  add_common(lp);
  lp->add_option("--problem", opt.problem_path, "Solve a raw LP given as JSON {objective, A, rhs}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve) return cmd_solve(opt);
    if (*simulate) return cmd_simulate(opt);
    if (*compare) return cmd_compare(opt);
    if (*lp) return cmd_lp(opt);
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << " (residual " << format_double(e.residual())
              << ")\n";
    return kExitNoConvergence;
  }
  return kExitUsage;
}
