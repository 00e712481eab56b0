#pragma once

// Scenario configuration and the experiment runner used by the command-line
// tool: one row per (baud, solver, seed), written as CSV plus a JSON report.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbcg/bench.hpp"
#include "mbcg/cg.hpp"
#include "mbcg/models.hpp"
#include "mbcg/phy.hpp"
#include "mbcg/topology.hpp"

namespace mbcg {

inline constexpr std::string_view kVersion = "mbcg 0.1.0";

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Solver { ilp, cg, ksp_ff, ff_ksp };

inline const char* solver_name(Solver s) {
  switch (s) {
    case Solver::ilp: return "ilp";
    case Solver::cg: return "cg";
    case Solver::ksp_ff: return "ksp-ff";
    case Solver::ff_ksp: return "ff-ksp";
  }
  return "cg";
}

inline Solver parse_solver(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "ilp") return Solver::ilp;
  if (t == "cg") return Solver::cg;
  if (t == "ksp-ff") return Solver::ksp_ff;
  if (t == "ff-ksp") return Solver::ff_ksp;
  throw ScenarioError("unknown solver '" + std::string(s) + "' (ilp, cg, ksp-ff, ff-ksp)");
}

inline bool is_benchmark(Solver s) { return s == Solver::ksp_ff || s == Solver::ff_ksp; }

struct IlpRunOptions {
  IlpOptions model;
  double time_limit_seconds{3600.0};
  double relative_gap{0.0};
  long node_limit{-1};
};

struct Scenario {
  std::string name{"scenario"};
  /// As written in the config: a path (resolved) or an inline topology object.
  nlohmann::json topology_source;
  nlohmann::json phy_source;
  NetworkTopology topology;
  PhysicalEnvironment phy;
  Mode mode{Mode::rwa};
  std::vector<Solver> solvers{Solver::cg};
  std::vector<double> baud_gbaud{25.0};
  int k{10};
  std::optional<long> transceivers;
  std::size_t formats_allowed{8};
  std::optional<int> wavelengths;
  /// "uniform" or a list of {s, d, weight}.
  nlohmann::json demand = "uniform";
  int trials{1};
  std::uint64_t seed{1};
  /// Explicit benchmark seeds; seed .. seed+trials-1 when empty.
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output{"results"};
  int workers{1};
  CgOptions cg;
  IlpRunOptions ilp;

  std::vector<std::uint64_t> trial_seeds() const {
    if (!seeds.empty()) return seeds;
    std::vector<std::uint64_t> out;
    for (int t = 0; t < trials; ++t) out.push_back(seed + static_cast<std::uint64_t>(t));
    return out;
  }
};

namespace detail {

template <class T>
T take(const nlohmann::json& obj, const char* key, T fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : it->get<T>();
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> keys,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      throw ScenarioError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

inline CgOptions cg_options_from_json(const nlohmann::json& j, CgOptions o) {
  reject_unknown(j,
                 {"pricing", "epsilon", "max_columns", "time_limit_seconds", "multi_column", "integer_gap",
                  "integer_time_limit_seconds", "integer_node_limit", "dive_steps", "dive_time_limit_seconds",
                  "exact_candidate_limit", "exact_time_limit_seconds"},
                 "cg options");
  if (j.contains("pricing")) o.pricing.rule = parse_pricing(j.at("pricing").get<std::string>());
  o.epsilon = take(j, "epsilon", o.epsilon);
  o.max_columns = take(j, "max_columns", o.max_columns);
  o.time_limit_seconds = take(j, "time_limit_seconds", o.time_limit_seconds);
  o.multi_column = take(j, "multi_column", o.multi_column);
  o.integer_gap = take(j, "integer_gap", o.integer_gap);
  o.integer_time_limit_seconds = take(j, "integer_time_limit_seconds", o.integer_time_limit_seconds);
  o.integer_node_limit = take(j, "integer_node_limit", o.integer_node_limit);
  o.dive_steps = take(j, "dive_steps", o.dive_steps);
  o.dive_time_limit_seconds = take(j, "dive_time_limit_seconds", o.dive_time_limit_seconds);
  o.pricing.exact_candidate_limit = take(j, "exact_candidate_limit", o.pricing.exact_candidate_limit);
  o.pricing.exact_time_limit_seconds = take(j, "exact_time_limit_seconds", o.pricing.exact_time_limit_seconds);
  if (o.epsilon < 0 || o.integer_gap < 0 || o.max_columns == 0 || o.dive_steps < 0) {
    throw ScenarioError("cg options out of range");
  }
  return o;
}

inline nlohmann::json to_json(const CgOptions& o) {
  return {{"pricing", pricing_name(o.pricing.rule)},
          {"epsilon", o.epsilon},
          {"max_columns", o.max_columns},
          {"time_limit_seconds", o.time_limit_seconds},
          {"multi_column", o.multi_column},
          {"integer_gap", o.integer_gap},
          {"integer_time_limit_seconds", o.integer_time_limit_seconds},
          {"integer_node_limit", o.integer_node_limit},
          {"dive_steps", o.dive_steps},
          {"dive_time_limit_seconds", o.dive_time_limit_seconds},
          {"exact_candidate_limit", o.pricing.exact_candidate_limit},
          {"exact_time_limit_seconds", o.pricing.exact_time_limit_seconds}};
}

inline IlpRunOptions ilp_options_from_json(const nlohmann::json& j, IlpRunOptions o) {
  reject_unknown(j,
                 {"time_limit_seconds", "relative_gap", "node_limit", "variable_cap", "symmetry_breaking",
                  "route_counts", "clique_rows"},
                 "ilp options");
  o.time_limit_seconds = take(j, "time_limit_seconds", o.time_limit_seconds);
  o.relative_gap = take(j, "relative_gap", o.relative_gap);
  o.node_limit = take(j, "node_limit", o.node_limit);
  o.model.variable_cap = take(j, "variable_cap", o.model.variable_cap);
  o.model.symmetry_breaking = take(j, "symmetry_breaking", o.model.symmetry_breaking);
  o.model.route_counts = take(j, "route_counts", o.model.route_counts);
  o.model.clique_rows = take(j, "clique_rows", o.model.clique_rows);
  if (o.relative_gap < 0 || o.time_limit_seconds <= 0) throw ScenarioError("ilp options out of range");
  return o;
}

inline nlohmann::json to_json(const IlpRunOptions& o) {
  return {{"time_limit_seconds", o.time_limit_seconds},
          {"relative_gap", o.relative_gap},
          {"node_limit", o.node_limit},
          {"variable_cap", o.model.variable_cap},
          {"symmetry_breaking", o.model.symmetry_breaking},
          {"route_counts", o.model.route_counts},
          {"clique_rows", o.model.clique_rows}};
}

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

inline std::vector<NodePair> demand_pairs(const NetworkTopology& topo, const nlohmann::json& demand,
                                          std::vector<double>* weights) {
  std::vector<NodePair> pairs;
  if (demand.is_string()) {
    if (demand != "uniform") throw ScenarioError("demand must be \"uniform\" or a list of {s, d, weight}");
    return pairs;
  }
  if (!demand.is_array()) throw ScenarioError("demand must be \"uniform\" or a list of {s, d, weight}");
  for (const auto& e : demand) {
    const auto s = topo.find_node(e.at("s").get<std::string>());
    const auto d = topo.find_node(e.at("d").get<std::string>());
    if (!s || !d) throw ScenarioError("demand references an unknown node");
    if (*s == *d) throw ScenarioError("demand pair with identical endpoints");
    pairs.push_back({*s, *d});
    const double w = e.value("weight", 1.0);
    if (!(w >= 0) || !std::isfinite(w)) throw ScenarioError("demand weights must be finite and nonnegative");
    if (weights) weights->push_back(w);
  }
  if (pairs.empty()) throw ScenarioError("demand list is empty");
  return pairs;
}

}  // namespace detail

/// Parses and validates a scenario. Relative topology and phy paths resolve
/// against `base`; the output directory is kept as written.
inline Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ScenarioError("scenario config must be a JSON object");
  detail::reject_unknown(j,
                         {"name", "topology", "phy", "mode", "solver", "solvers", "baud_gbaud", "k", "transceivers",
                          "formats_allowed", "wavelengths", "demand", "trials", "seed", "seeds", "output", "workers",
                          "cg", "ilp"},
                         "scenario");
  Scenario s;
  try {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return (path.is_relative() && !base.empty() ? base / path : path).lexically_normal();
    };
    s.name = detail::take(j, "name", s.name);
    if (!j.contains("topology")) throw ScenarioError("scenario needs a topology");
    const auto& t = j.at("topology");
    if (t.is_string()) {
      const auto path = resolve(t.get<std::string>());
      s.topology = load_topology(path);
      s.topology_source = path.string();
    } else {
      s.topology = parse_topology_json(t);
      s.topology_source = t;
    }
    if (auto it = j.find("phy"); it != j.end() && !it->is_null()) {
      nlohmann::json doc;
      if (it->is_string()) {
        const auto path = resolve(it->get<std::string>());
        std::ifstream in(path);
        if (!in) throw ScenarioError("cannot open phy config " + path.string());
        doc = nlohmann::json::parse(in);
        s.phy_source = path.string();
      } else {
        doc = *it;
        s.phy_source = *it;
      }
      s.phy = physical_environment_from_json(doc);
    }
    s.mode = parse_mode(detail::take(j, "mode", std::string("rwa")));
    if (j.contains("solver") && j.contains("solvers")) throw ScenarioError("give either solver or solvers");
    if (auto it = j.contains("solver") ? j.find("solver") : j.find("solvers"); it != j.end()) {
      s.solvers.clear();
      for (const auto& name : detail::scalar_or_list<std::string>(*it)) s.solvers.push_back(parse_solver(name));
    }
    if (j.contains("baud_gbaud")) s.baud_gbaud = detail::scalar_or_list<double>(j.at("baud_gbaud"));
    s.k = detail::take(j, "k", s.k);
    if (j.contains("transceivers")) s.transceivers = parse_transceivers(j.at("transceivers"));
    s.formats_allowed = detail::take(j, "formats_allowed", s.formats_allowed);
    if (j.contains("wavelengths") && !j.at("wavelengths").is_null()) s.wavelengths = j.at("wavelengths").get<int>();
    if (j.contains("demand")) s.demand = j.at("demand");
    s.trials = detail::take(j, "trials", s.trials);
    s.seed = detail::take(j, "seed", s.seed);
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.output = detail::take(j, "output", s.output.string());
    s.workers = detail::take(j, "workers", s.workers);
    if (j.contains("cg")) s.cg = detail::cg_options_from_json(j.at("cg"), s.cg);
    if (j.contains("ilp")) s.ilp = detail::ilp_options_from_json(j.at("ilp"), s.ilp);
    s.cg.init_seed = s.seed;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario json: ") + e.what());
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ScenarioError(e.what());
  }

  if (s.solvers.empty()) throw ScenarioError("solver list is empty");
  if (s.baud_gbaud.empty()) throw ScenarioError("baud list is empty");
  for (double b : s.baud_gbaud) {
    if (!(b > 0) || !std::isfinite(b)) throw ScenarioError("baud rates must be positive");
  }
  std::vector<double> sorted = s.baud_gbaud;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ScenarioError("duplicate baud rate");
  if (s.k < 1) throw ScenarioError("k must be at least 1");
  if (s.formats_allowed < 1 || s.formats_allowed > s.phy.modulation.size()) {
    throw ScenarioError("formats_allowed must be in 1.." + std::to_string(s.phy.modulation.size()));
  }
  if (s.wavelengths && *s.wavelengths < 0) throw ScenarioError("wavelengths must be nonnegative");
  const bool benchmarks = std::any_of(s.solvers.begin(), s.solvers.end(), is_benchmark);
  if (benchmarks && s.trials < 1 && s.seeds.empty()) throw ScenarioError("benchmark solvers need trials >= 1");
  if (s.workers < 1) throw ScenarioError("workers must be at least 1");
  detail::demand_pairs(s.topology, s.demand, nullptr);
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  try {
    return scenario_from_json(nlohmann::json::parse(in), path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario json: ") + e.what());
  }
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json solvers = nlohmann::json::array();
  for (Solver v : s.solvers) solvers.push_back(solver_name(v));
  nlohmann::json j = {{"name", s.name},
                      {"topology", s.topology_source},
                      {"mode", mode_name(s.mode)},
                      {"solvers", solvers},
                      {"baud_gbaud", s.baud_gbaud},
                      {"k", s.k},
                      {"transceivers", s.transceivers ? nlohmann::json(*s.transceivers) : nlohmann::json("inf")},
                      {"formats_allowed", s.formats_allowed},
                      {"demand", s.demand},
                      {"trials", s.trials},
                      {"seed", s.seed},
                      {"output", s.output.string()},
                      {"workers", s.workers},
                      {"cg", detail::to_json(s.cg)},
                      {"ilp", detail::to_json(s.ilp)}};
  if (!s.phy_source.is_null()) j["phy"] = s.phy_source;
  if (s.wavelengths) j["wavelengths"] = *s.wavelengths;
  if (!s.seeds.empty()) j["seeds"] = s.seeds;
  return j;
}

/// FNV-1a over the canonical result-relevant content: the loaded topology and
/// phy settings instead of their paths, without name, output and workers.
inline std::string config_hash(const Scenario& s) {
  auto j = to_json(s);
  j.erase("name");
  j.erase("output");
  j.erase("workers");
  j["topology"] = to_json(s.topology);
  j["phy"] = to_json(s.phy);
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Instance scenario_instance(const Scenario& s, double baud_gbaud) {
  InstanceSpec spec;
  spec.k = s.k;
  spec.mode = s.mode;
  spec.baud_hz = baud_gbaud * 1e9;
  spec.formats_allowed = s.formats_allowed;
  spec.transceivers = s.transceivers;
  spec.wavelengths = s.wavelengths;
  spec.pairs = detail::demand_pairs(s.topology, s.demand, &spec.weights);
  return make_instance(s.topology, s.phy, spec);
}

// ---------------------------------------------------------------------------
// Runner

struct ResultRow {
  std::string scenario;
  std::string config_hash;
  Mode mode{Mode::rwa};
  Solver solver{Solver::cg};
  double baud_gbaud{0};
  int wavelengths{0};
  int k{0};
  std::optional<long> transceivers;
  std::size_t formats_allowed{0};
  std::uint64_t seed{0};
  /// optimal | gap_reached | time_limit | ok | memory-cap | error
  std::string status{"error"};
  std::string detail;
  double throughput_bps{0};
  /// Upper bound: relaxed RMP value (cg) or branch-and-bound bound (ilp).
  double bound_bps{std::numeric_limits<double>::quiet_NaN()};
  double gap{std::numeric_limits<double>::quiet_NaN()};
  std::size_t lightpaths{0};
  std::size_t columns{0};
  int iterations{0};
  long nodes{0};
  std::size_t variables{0};
  /// Wall time per phase; kept out of the CSV so it stays reproducible.
  std::vector<std::pair<std::string, double>> seconds;

  bool failed() const { return status == "error" || status == "memory-cap" || status == "infeasible"; }
};

struct ScenarioResult {
  Scenario scenario;
  std::string config_hash;
  std::vector<ResultRow> rows;
  /// Integer CG solution per baud, for seeding related runs.
  std::map<double, CgSeed> cg_seeds;
  double wall_seconds{0};

  bool all_failed() const {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.failed(); });
  }
};

using SeedMap = std::map<double, std::vector<CgSeed>>;

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string audit(const Instance& inst, const std::vector<Lightpath>& lps, double reported_bps) {
  auto check = check_lightpaths(inst, lps);
  if (!check.ok) return check.problems.empty() ? "infeasible lightpaths" : check.problems.front();
  if (std::abs(check.throughput_bps - reported_bps) > 1e-6 * std::max(1.0, reported_bps)) {
    return "lightpath throughput differs from the reported objective";
  }
  return {};
}

/// Benchmarks report carried demand: it must fit in each pair's lightpath
/// capacity and sum to the reported throughput.
inline std::string audit(const Instance& inst, const LoadResult& load) {
  auto check = check_lightpaths(inst, load.lightpaths);
  if (!check.ok) return check.problems.empty() ? "infeasible lightpaths" : check.problems.front();
  double carried = 0;
  for (std::size_t p = 0; p < load.carried_bps.size(); ++p) {
    if (load.carried_bps[p] > check.pair_capacity_bps[p] * (1 + 1e-9) + 1e-3) return "carried demand above capacity";
    carried += load.carried_bps[p];
  }
  if (std::abs(carried - load.throughput_bps) > 1e-6 * std::max(1.0, load.throughput_bps)) {
    return "carried demand differs from the reported throughput";
  }
  return {};
}

struct BaudOutcome {
  std::vector<ResultRow> rows;
  std::optional<CgSeed> seed;
};

inline BaudOutcome run_baud(const Scenario& s, const std::string& hash, double baud,
                            const std::vector<CgSeed>& seeds) {
  BaudOutcome out;
  ResultRow base;
  base.scenario = s.name;
  base.config_hash = hash;
  base.mode = s.mode;
  base.baud_gbaud = baud;
  base.k = s.k;
  base.transceivers = s.transceivers;
  base.formats_allowed = s.formats_allowed;
  base.seed = s.seed;

  auto fail_all = [&](const std::string& why) {
    for (Solver v : s.solvers) {
      const auto trial_seeds = is_benchmark(v) ? s.trial_seeds() : std::vector<std::uint64_t>{s.seed};
      for (auto seed : trial_seeds) {
        ResultRow r = base;
        r.solver = v;
        r.seed = seed;
        r.detail = why;
        out.rows.push_back(r);
      }
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  Instance inst;
  try {
    inst = scenario_instance(s, baud);
  } catch (const std::exception& e) {
    fail_all(e.what());
    return out;
  }
  const double build_seconds = seconds_since(t0);
  base.wavelengths = inst.wavelengths;

  for (Solver v : s.solvers) {
    if (is_benchmark(v)) {
      const Strategy strategy = v == Solver::ksp_ff ? Strategy::ksp_ff : Strategy::ff_ksp;
      auto trial_seeds = s.trial_seeds();
      std::sort(trial_seeds.begin(), trial_seeds.end());
      for (auto seed : trial_seeds) {
        ResultRow r = base;
        r.solver = v;
        r.seed = seed;
        try {
          const auto t = std::chrono::steady_clock::now();
          auto load = sequential_load(inst, strategy, seed);
          r.seconds = {{"instance", build_seconds}, {"load", seconds_since(t)}};
          r.throughput_bps = load.throughput_bps;
          r.lightpaths = load.lightpaths.size();
          r.iterations = static_cast<int>(load.steps);
          r.detail = audit(inst, load);
          r.status = r.detail.empty() ? "ok" : "error";
        } catch (const std::exception& e) {
          r.detail = e.what();
        }
        out.rows.push_back(std::move(r));
      }
      continue;
    }

    ResultRow r = base;
    r.solver = v;
    try {
      if (v == Solver::cg) {
        auto rep = run_cg(inst, s.cg, seeds);
        r.seconds = {{"instance", build_seconds},      {"init", rep.init_seconds},
                     {"pricing", rep.pricing_loop_seconds}, {"integer", rep.integer_seconds},
                     {"packing", rep.packing_seconds}, {"total", rep.total_seconds}};
        r.throughput_bps = rep.integer_th_bps;
        r.bound_bps = rep.relaxed_th_bps;
        r.gap = rep.integer_gap;
        r.lightpaths = rep.assignment.lightpaths.size();
        r.columns = rep.pool_size;
        r.iterations = rep.iterations;
        r.nodes = rep.integer_nodes;
        r.status = lp::status_name(rep.integer_status);
        r.detail = audit(inst, rep.assignment.lightpaths, rep.integer_th_bps);
        if (!r.detail.empty()) r.status = "error";
        if (rep.exit != CgExit::converged) r.detail += (r.detail.empty() ? "" : "; ") + std::string("cg exit ") + exit_name(rep.exit);
        out.seed = seed_from(rep);
      } else {
        r.variables = ilp_variable_count(inst);
        IlpModel model;
        const auto tb = std::chrono::steady_clock::now();
        try {
          model = build_ilp(inst, s.ilp.model);
        } catch (const VariableCapExceeded& e) {
          r.status = "memory-cap";
          r.variables = e.count();
          r.detail = e.what();
          r.seconds = {{"instance", build_seconds}};
          out.rows.push_back(std::move(r));
          continue;
        }
        const double model_seconds = seconds_since(tb);
        lp::SolveOptions o;
        o.relative_gap = s.ilp.relative_gap;
        o.time_limit_seconds = s.ilp.time_limit_seconds;
        o.node_limit = s.ilp.node_limit;
        auto sol = lp::solve_milp(model.program, o);
        r.seconds = {{"instance", build_seconds}, {"model", model_seconds}, {"solve", sol.wall_seconds}};
        r.status = lp::status_name(sol.status);
        r.nodes = sol.nodes;
        r.iterations = static_cast<int>(sol.iterations);
        if (std::isfinite(sol.best_bound)) r.bound_bps = sol.best_bound * kLpUnit;
        if (sol.has_solution()) {
          auto lps = decode_ilp(inst, model, sol.values);
          r.lightpaths = lps.size();
          r.throughput_bps = check_lightpaths(inst, lps).throughput_bps;
          r.gap = sol.relative_gap;
          r.detail = audit(inst, lps, r.throughput_bps);
          if (!r.detail.empty()) r.status = "error";
        }
      }
    } catch (const std::exception& e) {
      r.status = "error";
      r.detail = e.what();
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

/// Runs every (baud, solver, seed) row. Bauds are independent and run on up to
/// `workers` threads; rows come back in config order of baud and solver, then
/// by seed. `seeds` adds CG seed solutions per baud.
inline ScenarioResult run_scenario(const Scenario& s, const SeedMap* seeds = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult res;
  res.scenario = s;
  res.config_hash = config_hash(s);
  const std::size_t n = s.baud_gbaud.size();
  std::vector<detail::BaudOutcome> outcomes(n);
  static const std::vector<CgSeed> none;
  auto work = [&](std::size_t i) {
    const double baud = s.baud_gbaud[i];
    const std::vector<CgSeed>* extra = &none;
    if (seeds) {
      if (auto it = seeds->find(baud); it != seeds->end()) extra = &it->second;
    }
    outcomes[i] = detail::run_baud(s, res.config_hash, baud, *extra);
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(s.workers), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& r : outcomes[i].rows) res.rows.push_back(std::move(r));
    if (outcomes[i].seed) res.cg_seeds[s.baud_gbaud[i]] = std::move(*outcomes[i].seed);
  }
  res.wall_seconds = detail::seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace detail

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "scenario,mode,solver,baud_gbaud,wavelengths,k,transceivers,formats_allowed,seed,status,throughput_bps,"
         "bound_bps,gap,lightpaths,columns,iterations,nodes,variables,config_hash,version,detail\n";
  for (const auto& r : rows) {
    out << detail::csv_field(r.scenario) << ',' << mode_name(r.mode) << ',' << solver_name(r.solver) << ','
        << detail::number(r.baud_gbaud) << ',' << r.wavelengths << ',' << r.k << ','
        << (r.transceivers ? std::to_string(*r.transceivers) : std::string("inf")) << ',' << r.formats_allowed << ','
        << r.seed << ',' << r.status << ',' << detail::number(r.throughput_bps) << ','
        << detail::number(r.bound_bps) << ',' << detail::number(r.gap) << ',' << r.lightpaths << ',' << r.columns
        << ',' << r.iterations << ',' << r.nodes << ',' << r.variables << ',' << r.config_hash << ',' << kVersion
        << ',' << detail::csv_field(r.detail) << '\n';
  }
}

inline nlohmann::json to_json(const ResultRow& r) {
  nlohmann::json seconds = nlohmann::json::object();
  for (const auto& [phase, t] : r.seconds) seconds[phase] = t;
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json() : nlohmann::json(v); };
  return {{"scenario", r.scenario},
          {"mode", mode_name(r.mode)},
          {"solver", solver_name(r.solver)},
          {"baud_gbaud", r.baud_gbaud},
          {"wavelengths", r.wavelengths},
          {"k", r.k},
          {"transceivers", r.transceivers ? nlohmann::json(*r.transceivers) : nlohmann::json("inf")},
          {"formats_allowed", r.formats_allowed},
          {"seed", r.seed},
          {"status", r.status},
          {"detail", r.detail},
          {"throughput_bps", r.throughput_bps},
          {"bound_bps", num(r.bound_bps)},
          {"gap", num(r.gap)},
          {"lightpaths", r.lightpaths},
          {"columns", r.columns},
          {"iterations", r.iterations},
          {"nodes", r.nodes},
          {"variables", r.variables},
          {"config_hash", r.config_hash},
          {"seconds", seconds}};
}

inline nlohmann::json report_json(const std::vector<const ScenarioResult*>& results) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto* res : results) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : res->rows) rows.push_back(to_json(r));
    runs.push_back({{"scenario", to_json(res->scenario)},
                    {"config_hash", res->config_hash},
                    {"wall_seconds", res->wall_seconds},
                    {"rows", rows}});
  }
  return {{"version", kVersion}, {"runs", runs}};
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<const ScenarioResult*>& results) {
  std::filesystem::create_directories(dir);
  std::vector<ResultRow> rows;
  for (const auto* res : results) rows.insert(rows.end(), res->rows.begin(), res->rows.end());
  std::ofstream csv(dir / "results.csv");
  if (!csv) throw ScenarioError("cannot write " + (dir / "results.csv").string());
  write_results_csv(csv, rows);
  std::ofstream rep(dir / "report.json");
  if (!rep) throw ScenarioError("cannot write " + (dir / "report.json").string());
  rep << report_json(results).dump(2) << '\n';
}

inline void write_outputs(const ScenarioResult& result) { write_outputs(result.scenario.output, {&result}); }

// ---------------------------------------------------------------------------
// Comparisons

struct ComparisonRow {
  double baud_gbaud{0};
  Solver solver{Solver::cg};
  std::uint64_t seed{0};
  double throughput_a_bps{0};
  double throughput_b_bps{0};
  std::string status_a;
  std::string status_b;
  /// b / a; NaN when a carries nothing.
  double ratio{std::numeric_limits<double>::quiet_NaN()};
};

struct Comparison {
  std::string label_a;
  std::string label_b;
  ScenarioResult a;
  ScenarioResult b;
  std::vector<ComparisonRow> rows;
};

inline std::string scenario_label(const Scenario& s) {
  return std::string(mode_name(s.mode)) + "/A=" + (s.transceivers ? std::to_string(*s.transceivers) : "inf") +
         "/formats=" + std::to_string(s.formats_allowed);
}

/// Throws unless `a` and `b` differ only in mode, transceivers and
/// formats_allowed (name, output and workers are ignored).
inline void check_comparable(const Scenario& a, const Scenario& b) {
  auto strip = [](const Scenario& s) {
    auto j = to_json(s);
    for (const char* key : {"name", "output", "workers", "mode", "transceivers", "formats_allowed"}) j.erase(key);
    j["topology"] = to_json(s.topology);
    j["phy"] = to_json(s.phy);
    return j;
  };
  const auto ja = strip(a);
  const auto jb = strip(b);
  for (auto it = ja.begin(); it != ja.end(); ++it) {
    if (!jb.contains(it.key()) || jb.at(it.key()) != it.value()) {
      throw ScenarioError("scenarios not comparable: '" + it.key() + "' differs");
    }
  }
  for (auto it = jb.begin(); it != jb.end(); ++it) {
    if (!ja.contains(it.key())) throw ScenarioError("scenarios not comparable: '" + it.key() + "' differs");
  }
}

/// Runs `a`, then `b` with a's CG solutions as seeds, and pairs up the rows.
/// The seeding makes CG ratios at least 1 whenever b's feasible set contains
/// a's solution (RWBA over RWA, more formats, more transceivers).
inline Comparison compare_modes(const Scenario& a, const Scenario& b) {
  check_comparable(a, b);
  Comparison c;
  c.label_a = scenario_label(a);
  c.label_b = scenario_label(b);
  c.a = run_scenario(a);
  SeedMap seeds;
  for (const auto& [baud, seed] : c.a.cg_seeds) seeds[baud].push_back(seed);
  c.b = run_scenario(b, &seeds);
  for (std::size_t i = 0; i < c.a.rows.size() && i < c.b.rows.size(); ++i) {
    const auto& ra = c.a.rows[i];
    const auto& rb = c.b.rows[i];
    ComparisonRow row{ra.baud_gbaud, ra.solver, ra.seed, ra.throughput_bps, rb.throughput_bps, ra.status, rb.status};
    if (ra.throughput_bps > 0) row.ratio = rb.throughput_bps / ra.throughput_bps;
    c.rows.push_back(row);
  }
  return c;
}

inline void write_comparison_csv(std::ostream& out, const Comparison& c) {
  out << "baud_gbaud,solver,seed,a,b,throughput_a_bps,throughput_b_bps,status_a,status_b,ratio\n";
  for (const auto& r : c.rows) {
    out << detail::number(r.baud_gbaud) << ',' << solver_name(r.solver) << ',' << r.seed << ','
        << detail::csv_field(c.label_a) << ',' << detail::csv_field(c.label_b) << ','
        << detail::number(r.throughput_a_bps) << ',' << detail::number(r.throughput_b_bps) << ',' << r.status_a
        << ',' << r.status_b << ',' << detail::number(r.ratio) << '\n';
  }
}

/// The scenario at each formats count in turn. Every point is seeded with
/// `reference[i]` when given (e.g. the RWA sweep for an RWBA sweep) and with the
/// previous point.
inline std::vector<ScenarioResult> format_sweep(const Scenario& s, const std::vector<std::size_t>& formats,
                                                const std::vector<ScenarioResult>* reference = nullptr) {
  if (formats.empty()) throw ScenarioError("formats list is empty");
  if (reference && reference->size() != formats.size()) throw ScenarioError("reference sweep has a different length");
  std::vector<ScenarioResult> out;
  for (std::size_t i = 0; i < formats.size(); ++i) {
    if (formats[i] < 1 || formats[i] > s.phy.modulation.size()) {
      throw ScenarioError("formats_allowed must be in 1.." + std::to_string(s.phy.modulation.size()));
    }
    Scenario point = s;
    point.formats_allowed = formats[i];
    SeedMap seeds;
    if (reference) {
      for (const auto& [baud, seed] : (*reference)[i].cg_seeds) seeds[baud].push_back(seed);
    }
    if (!out.empty()) {
      for (const auto& [baud, seed] : out.back().cg_seeds) seeds[baud].push_back(seed);
    }
    out.push_back(run_scenario(point, &seeds));
  }
  return out;
}

}  // namespace mbcg
