#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "karma/config.hpp"
#include "karma/equilibrium.hpp"
#include "karma/error.hpp"
#include "karma/simulator.hpp"

namespace karma {

using Json = nlohmann::json;

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that round-trips, independent of locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct RunConfig {
  GameConfig game;
  SolverConfig solver;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ParameterError(key, "expected a real number, got '" + v + "'");
  }
  return out;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ParameterError(key, "expected an integer, got '" + v + "'");
  }
  return out;
}

inline Json parse_list(const std::string& key, const std::string& v) {
  try {
    Json j = Json::parse(v);
    if (!j.is_array()) throw ParameterError(key, "expected a bracketed list");
    return j;
  } catch (const Json::exception&) {
    throw ParameterError(key, "malformed list '" + v + "'");
  }
}

inline Matrix parse_matrix(const std::string& key, const std::string& v) {
  try {
    return parse_list(key, v).get<Matrix>();
  } catch (const Json::exception&) {
    throw ParameterError(key, "expected a list of numeric rows");
  }
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Lists use brackets,
/// e.g. `urgency_levels = [1, 2, 4, 8, 16]`. Unknown keys are rejected.
/// When k_max is absent it defaults to 4 * k_bar.
inline RunConfig parse_config(std::istream& in) {
  RunConfig rc;
  GameConfig& g = rc.game;
  SolverConfig& s = rc.solver;
  std::optional<Matrix> phi_win, phi_yield;
  bool k_max_set = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    using detail::parse_integer;
    using detail::parse_real;
    if (key == "urgency_levels") {
      try {
        g.urgency_levels = detail::parse_list(key, val).get<std::vector<int>>();
      } catch (const Json::exception&) {
        throw ParameterError(key, "expected a list of integers");
      }
    } else if (key == "epsilon") {
      g.epsilon = parse_real(key, val);
    } else if (key == "phi_win") {
      phi_win = detail::parse_matrix(key, val);
    } else if (key == "phi_yield") {
      phi_yield = detail::parse_matrix(key, val);
    } else if (key == "alpha") {
      g.alpha = parse_real(key, val);
    } else if (key == "k_bar") {
      g.k_bar = parse_integer<int>(key, val);
    } else if (key == "k_max") {
      g.k_max = parse_integer<int>(key, val);
      k_max_set = true;
    } else if (key == "n_agents") {
      g.n_agents = parse_integer<int>(key, val);
    } else if (key == "n_rounds") {
      g.n_rounds = parse_integer<int>(key, val);
    } else if (key == "burn_in") {
      g.burn_in = parse_integer<int>(key, val);
    } else if (key == "replications") {
      g.replications = parse_integer<int>(key, val);
    } else if (key == "rng_seed") {
      g.rng_seed = parse_integer<std::uint64_t>(key, val);
    } else if (key == "br_temperature") {
      s.br_temperature = parse_real(key, val);
    } else if (key == "temperature_decay") {
      s.temperature_decay = parse_real(key, val);
    } else if (key == "temperature_floor") {
      s.temperature_floor = parse_real(key, val);
    } else if (key == "step_size") {
      s.step_size = parse_real(key, val);
    } else if (key == "tol_policy") {
      s.tol_policy = parse_real(key, val);
    } else if (key == "tol_distribution") {
      s.tol_distribution = parse_real(key, val);
    } else if (key == "tol_value") {
      s.tol_value = parse_real(key, val);
    } else if (key == "max_outer_iters") {
      s.max_outer_iters = parse_integer<int>(key, val);
    } else {
      throw ParameterError(key, "unknown configuration key");
    }
  }
  if (phi_win.has_value() != phi_yield.has_value()) {
    throw ParameterError(phi_win ? "phi_yield" : "phi_win",
                         "phi_win and phi_yield must be given together");
  }
  if (phi_win) g.phi_override = std::array<Matrix, 2>{*phi_win, *phi_yield};
  if (!k_max_set) g.k_max = 4 * g.k_bar;
  g.validate();
  s.validate();
  (void)g.process();
  return rc;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

inline void to_json(Json& j, const GameConfig& g) {
  j = Json{{"urgency_levels", g.urgency_levels},
           {"epsilon", g.epsilon},
           {"alpha", g.alpha},
           {"k_bar", g.k_bar},
           {"k_max", g.k_max},
           {"n_agents", g.n_agents},
           {"n_rounds", g.n_rounds},
           {"burn_in", g.burn_in},
           {"replications", g.replications},
           {"rng_seed", g.rng_seed}};
  if (g.phi_override) {
    j["phi_win"] = (*g.phi_override)[0];
    j["phi_yield"] = (*g.phi_override)[1];
  }
}

inline void from_json(const Json& j, GameConfig& g) {
  j.at("urgency_levels").get_to(g.urgency_levels);
  j.at("epsilon").get_to(g.epsilon);
  j.at("alpha").get_to(g.alpha);
  j.at("k_bar").get_to(g.k_bar);
  j.at("k_max").get_to(g.k_max);
  j.at("n_agents").get_to(g.n_agents);
  j.at("n_rounds").get_to(g.n_rounds);
  j.at("burn_in").get_to(g.burn_in);
  j.at("replications").get_to(g.replications);
  j.at("rng_seed").get_to(g.rng_seed);
  g.phi_override.reset();
  if (j.contains("phi_win")) {
    g.phi_override = std::array<Matrix, 2>{j.at("phi_win").get<Matrix>(),
                                           j.at("phi_yield").get<Matrix>()};
  }
}

inline void to_json(Json& j, const SolverConfig& s) {
  j = Json{{"br_temperature", s.br_temperature},     {"temperature_decay", s.temperature_decay},
           {"temperature_floor", s.temperature_floor}, {"step_size", s.step_size},
           {"tol_policy", s.tol_policy},             {"tol_distribution", s.tol_distribution},
           {"tol_value", s.tol_value},               {"max_outer_iters", s.max_outer_iters}};
}

inline void from_json(const Json& j, SolverConfig& s) {
  j.at("br_temperature").get_to(s.br_temperature);
  j.at("temperature_decay").get_to(s.temperature_decay);
  j.at("temperature_floor").get_to(s.temperature_floor);
  j.at("step_size").get_to(s.step_size);
  j.at("tol_policy").get_to(s.tol_policy);
  j.at("tol_distribution").get_to(s.tol_distribution);
  j.at("tol_value").get_to(s.tol_value);
  j.at("max_outer_iters").get_to(s.max_outer_iters);
}

/// Everything needed to rerun a command, plus what it produced.
struct RunManifest {
  std::string version = "1.0.0";
  std::string command;
  RunConfig config;
  std::vector<std::string> mechanisms;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings_seconds;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline void to_json(Json& j, const RunManifest& m) {
  j = Json{{"version", m.version},       {"command", m.command},
           {"game", m.config.game},      {"solver", m.config.solver},
           {"mechanisms", m.mechanisms}, {"seed", m.seed},
           {"outputs", m.outputs},       {"timings_seconds", m.timings_seconds}};
}

inline void from_json(const Json& j, RunManifest& m) {
  j.at("version").get_to(m.version);
  j.at("command").get_to(m.command);
  j.at("game").get_to(m.config.game);
  j.at("solver").get_to(m.config.solver);
  j.at("mechanisms").get_to(m.mechanisms);
  j.at("seed").get_to(m.seed);
  j.at("outputs").get_to(m.outputs);
  j.at("timings_seconds").get_to(m.timings_seconds);
}

inline RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  try {
    RunManifest m = Json::parse(in).get<RunManifest>();
    m.config.game.validate();
    m.config.solver.validate();
    return m;
  } catch (const Json::exception& e) {
    throw ParameterError("manifest", e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

// CSV exports. Urgency is written as its level value, not its index.

inline std::string policy_csv(const SocialState& social, const UrgencyProcess& process) {
  std::string s = "urgency_level,karma,bid,probability\n";
  for (int u = 0; u < social.n_urgency(); ++u) {
    for (int k = 0; k <= social.k_max(); ++k) {
      const auto row = social.policy(u, k);
      for (std::size_t b = 0; b < row.size(); ++b) {
        s += std::to_string(process.level(static_cast<std::size_t>(u))) + "," + std::to_string(k) +
             "," + std::to_string(b) + "," + format_double(row[b]) + "\n";
      }
    }
  }
  return s;
}

inline std::string distribution_csv(const SocialState& social, const UrgencyProcess& process) {
  std::string s = "urgency_level,karma,mass\n";
  for (int u = 0; u < social.n_urgency(); ++u) {
    for (int k = 0; k <= social.k_max(); ++k) {
      s += std::to_string(process.level(static_cast<std::size_t>(u))) + "," + std::to_string(k) +
           "," + format_double(social.mass(u, k)) + "\n";
    }
  }
  return s;
}

inline std::string residuals_csv(const EquilibriumResult& r) {
  std::string s = "iteration,temperature,exploitability,stationarity,mean_karma\n";
  for (const auto& t : r.trace) {
    s += std::to_string(t.iteration) + "," + format_double(t.temperature) + "," +
         format_double(t.exploitability) + "," + format_double(t.stationarity) + "," +
         format_double(t.mean_karma) + "\n";
  }
  return s;
}

inline Json equilibrium_summary(const EquilibriumResult& r) {
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iteration", t.iteration},
                     {"temperature", t.temperature},
                     {"exploitability", t.exploitability},
                     {"stationarity", t.stationarity}});
  }
  return Json{{"converged", r.converged},
              {"iterations", r.iterations},
              {"exploitability", r.final_exploitability()},
              {"stationarity", r.final_stationarity()},
              {"mean_karma", r.social.mean_karma()},
              {"bellman_residual", r.values.bellman_residual},
              {"residuals", trace}};
}

inline Json equilibrium_json(const EquilibriumResult& r, const UrgencyProcess& process) {
  Json states = Json::array();
  for (int u = 0; u < r.social.n_urgency(); ++u) {
    for (int k = 0; k <= r.social.k_max(); ++k) {
      const auto row = r.social.policy(u, k);
      states.push_back({{"urgency_level", process.level(static_cast<std::size_t>(u))},
                        {"karma", k},
                        {"mass", r.social.mass(u, k)},
                        {"policy", std::vector<double>(row.begin(), row.end())}});
    }
  }
  return Json{{"states", states}};
}

inline Json metrics_json(const MetricsReport& m) {
  Json j{{"mechanism", std::string(to_string(m.mechanism))},
         {"seed", m.seed},
         {"r_bar", m.r_bar},
         {"beta", m.beta},
         {"agent_average_reward", m.agent_average_reward}};
  if (m.lp_bound) j["lp_bound"] = *m.lp_bound;
  return j;
}

/// Per measured round: running R-bar and, for KARMA, total karma.
inline std::string round_trace_csv(const MetricsReport& m, int burn_in) {
  std::string s = "round,r_bar_running,total_karma\n";
  for (std::size_t t = 0; t < m.r_bar_trace.size(); ++t) {
    const std::size_t global = t + static_cast<std::size_t>(burn_in);
    s += std::to_string(global) + "," + format_double(m.r_bar_trace[t]) + ",";
    if (global < m.karma_totals.size()) s += std::to_string(m.karma_totals[global]);
    s += "\n";
  }
  return s;
}

inline std::string karma_histogram_csv(const MetricsReport& m, int burn_in) {
  std::string s = "round,karma,count\n";
  for (std::size_t t = 0; t < m.karma_histograms.size(); ++t) {
    const auto& h = m.karma_histograms[t];
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k] == 0) continue;
      s += std::to_string(t + static_cast<std::size_t>(burn_in)) + "," + std::to_string(k) + "," +
           std::to_string(h[k]) + "\n";
    }
  }
  return s;
}

}  // namespace karma
