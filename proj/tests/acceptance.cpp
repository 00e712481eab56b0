// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mbcg/bench.hpp"
#include "mbcg/cg.hpp"
#include "mbcg/lp.hpp"
#include "mbcg/models.hpp"
#include "mbcg/phy.hpp"
#include "mbcg/scenario.hpp"
#include "oracles.hpp"

using namespace mbcg;

namespace {

const std::string kData = MBCG_DATA_DIR;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every CG and benchmark solution produced below is audited here and reported
// under criterion 9.
struct Audit {
  long solutions{0};
  long violations{0};
  std::string first;

  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }

  void cg(const Instance& inst, const CgReport& r, const std::string& where) {
    ++solutions;
    auto check = check_lightpaths(inst, r.assignment.lightpaths);
    if (!check.ok) return fail(where + ": " + check.problems.front());
    long used = 0;
    for (std::size_t c = 0; c < r.columns.size(); ++c) used += static_cast<long>(r.columns[c].routes.size()) * r.z[c];
    if (inst.transceivers && used > *inst.transceivers) return fail(where + ": transceiver budget exceeded");
    if (used != check.transceivers) return fail(where + ": packing lost lightpaths");
    if (std::abs(check.throughput_bps - r.integer_th_bps) > 1e-6 * std::max(1.0, r.integer_th_bps)) {
      fail(where + fmt(": recomputed %.6g vs reported %.6g", check.throughput_bps, r.integer_th_bps));
    }
  }

  void load(const Instance& inst, const LoadResult& l, const std::string& where) {
    ++solutions;
    auto check = check_lightpaths(inst, l.lightpaths);
    if (!check.ok) return fail(where + ": " + check.problems.front());
    double carried = 0;
    for (std::size_t p = 0; p < l.carried_bps.size(); ++p) {
      if (l.carried_bps[p] > check.pair_capacity_bps[p] * (1 + 1e-9) + 1e-3) {
        return fail(where + ": carried demand above lightpath capacity");
      }
      carried += l.carried_bps[p];
    }
    if (std::abs(carried - l.throughput_bps) > 1e-6 * std::max(1.0, l.throughput_bps)) {
      fail(where + fmt(": recomputed %.6g vs reported %.6g", carried, l.throughput_bps));
    }
  }
};

Audit audit;
const PhysicalEnvironment kEnv{};

Instance named(const std::string& topo, int k, double baud, Mode mode, std::optional<long> a = std::nullopt) {
  InstanceSpec s;
  s.k = k;
  s.baud_hz = baud;
  s.mode = mode;
  s.transceivers = a;
  return make_instance(load_topology(kData + "/topologies/" + topo + ".csv"), kEnv, s);
}

// ---------------------------------------------------------------------------

Outcome wavelength_mapping() {
  const std::vector<std::pair<double, int>> expected = {{500e9, 30},   {200e9, 75},   {150e9, 100},
                                                        {100e9, 150},  {50e9, 300},   {25e9, 600},
                                                        {15e9, 1000},  {12.5e9, 1200}, {10e9, 1500}};
  for (auto [baud, w] : expected) {
    const auto g = build_grid(baud, 15e12);
    if (g.channel_count != w || static_cast<int>(g.offsets_hz.size()) != w) {
      return {false, fmt("%g GBaud gives W = %d, expected %d", baud / 1e9, g.channel_count, w)};
    }
  }
  return {true, "9 baud rates"};
}

Outcome desk_oracle() {
  std::mt19937_64 rng(12345);
  const int count = 60;
  int viol_a = 0;
  int viol_b = 0;
  int near = 0;
  int unproven = 0;
  double worst = 1;
  for (int t = 0; t < count; ++t) {
    auto inst = fixture::desk_instance(rng, kEnv);
    auto ilp = build_ilp(inst);
    lp::SolveOptions o;
    o.relative_gap = 0;
    o.time_limit_seconds = 60;
    auto sol = lp::solve_milp(ilp.program, o);
    if (sol.status != lp::Status::optimal) {
      ++unproven;
      continue;
    }
    CgOptions co;
    co.pricing.rule = PricingRule::hybrid;
    co.integer_gap = 0;
    auto r = run_cg(inst, co);
    audit.cg(inst, r, fmt("desk instance %d", t));
    const double opt = sol.objective * kLpUnit;
    const double tol = 1e-6 * std::max(opt, r.relaxed_th_bps) + 1.0;
    if (r.integer_th_bps > opt + tol) ++viol_a;
    if (r.relaxed_th_bps < opt - tol) ++viol_b;
    if (r.integer_th_bps >= 0.9 * opt - tol) ++near;
    if (opt > tol) worst = std::min(worst, r.integer_th_bps / opt);
  }
  const bool pass = unproven == 0 && viol_a == 0 && viol_b == 0 && near >= 0.9 * count;
  return {pass, fmt("%d instances, ILP not proven optimal %d, (a) violations %d, (b) violations %d, "
                    "(c) within 90%% on %d/%d, worst ratio %.3f",
                    count, unproven, viol_a, viol_b, near, count, worst)};
}

Outcome lp_kernel() {
  std::mt19937_64 rng(2024);
  int optimal = 0;
  int trials = 0;
  double worst_obj = 0;
  double worst_dual = 0;
  for (; trials < 200; ++trials) {
    auto d = oracle::random_lp(rng, 8, 8);
    lp::LinearProgram prog(lp::Sense::maximize);
    for (int j = 0; j < d.n; ++j) prog.add_variable(d.c[j], d.lo[j], d.hi[j]);
    for (std::size_t i = 0; i < d.a.size(); ++i) {
      std::vector<lp::Term> terms;
      for (int j = 0; j < d.n; ++j) {
        if (d.a[i][j] != 0) terms.push_back({j, d.a[i][j]});
      }
      const auto rel = d.rel[i] < 0   ? lp::Relation::less_equal
                       : d.rel[i] > 0 ? lp::Relation::greater_equal
                                      : lp::Relation::equal;
      prog.add_row(terms, rel, d.b[i]);
    }
    auto expected = oracle::lp_by_vertex_enumeration(d);
    auto s = lp::solve_lp(prog);
    if (!expected) {
      if (s.status != lp::Status::infeasible) return {false, fmt("trial %d: oracle infeasible, solver %s", trials,
                                                                 lp::status_name(s.status))};
      continue;
    }
    if (s.status != lp::Status::optimal) {
      return {false, fmt("trial %d: solver %s on a feasible bounded LP", trials, lp::status_name(s.status))};
    }
    ++optimal;
    const double scale = std::max(1.0, std::abs(*expected));
    worst_obj = std::max(worst_obj, std::abs(s.objective - *expected) / scale);
    worst_dual = std::max(worst_dual, std::abs(lp::dual_objective(prog, s) - s.objective) / scale);
  }
  const bool pass = optimal >= 50 && worst_obj <= 1e-6 && worst_dual <= 1e-6;
  return {pass, fmt("%d LPs (%d optimal), worst objective error %.2e, worst primal-dual gap %.2e", trials, optimal,
                    worst_obj, worst_dual)};
}

Outcome db_arithmetic() {
  double worst = 0;
  for (double x : {24.8, 24.5, 20.4, 13.0}) {
    for (int k = 1; k <= 64; ++k) {
      const double d = path_snr_db(x, 2 * k, 0.0) - (path_snr_db(x, k, 0.0) - 3.0102999566);
      worst = std::max(worst, std::abs(d));
    }
  }
  if (worst > 1e-9) return {false, fmt("doubling law off by %.3e dB", worst)};
  const auto table = default_modulation_table();
  const std::vector<std::pair<std::string, double>> thresholds = {
      {"PM-BPSK", 3.7},   {"PM-QPSK", 6.7},   {"PM-8QAM", 10.8},   {"PM-16QAM", 13.2},
      {"PM-32QAM", 16.2}, {"PM-64QAM", 19.0}, {"PM-128QAM", 21.8}, {"PM-256QAM", 24.7}};
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    auto at = select_modulation(table, thresholds[i].second);
    if (!at || table[*at].name != thresholds[i].first) {
      return {false, fmt("%.2f dB does not select %s", thresholds[i].second, thresholds[i].first.c_str())};
    }
    auto below = select_modulation(table, std::nextafter(thresholds[i].second, 0.0));
    if (i == 0 ? below.has_value() : (!below || *below != i - 1)) {
      return {false, fmt("just below %.2f dB selects the wrong format", thresholds[i].second)};
    }
  }
  if (select_modulation(table, 3.69)) return {false, "3.69 dB selects a format"};
  return {true, fmt("doubling law within %.1e dB; 24.7 dB -> PM-256QAM, 3.69 dB -> none", worst)};
}

Outcome rwba_dominance() {
  int tested = 0;
  int violations = 0;
  std::string first;
  auto note = [&](bool ok, const std::string& where) {
    ++tested;
    if (!ok && violations++ == 0) first = where;
  };

  std::mt19937_64 rng(777);
  for (int t = 0; t < 40; ++t) {
    auto d = fixture::desk_draw(rng);
    if (t % 2) d.spec.transceivers = 1 + static_cast<long>(draw_below(rng, 8));
    d.spec.mode = Mode::rwa;
    auto rwa = make_instance(d.topology, kEnv, d.spec);
    d.spec.mode = Mode::rwba;
    auto rwba = make_instance(d.topology, kEnv, d.spec);
    bool cap_ok = true;
    for (RouteId r = 0; r < static_cast<RouteId>(rwa.routes.size()); ++r) {
      for (Band b : kBands) cap_ok = cap_ok && rwba.capacity.at(r, b) >= rwa.capacity.rwa(r);
    }
    note(cap_ok, fmt("desk %d capacity matrix", t));
    auto ra = run_cg(rwa);
    auto seed = seed_from(ra);
    auto rb = run_cg(rwba, {}, &seed);
    audit.cg(rwa, ra, fmt("dominance desk %d RWA", t));
    audit.cg(rwba, rb, fmt("dominance desk %d RWBA", t));
    note(rb.integer_th_bps >= ra.integer_th_bps - 1e-3, fmt("desk %d CG", t));
    if (ilp_variable_count(rwa) <= 200) {
      lp::SolveOptions o;
      o.time_limit_seconds = 30;
      auto ia = lp::solve_milp(build_ilp(rwa).program, o);
      auto ib = lp::solve_milp(build_ilp(rwba).program, o);
      if (ia.status == lp::Status::optimal && ib.status == lp::Status::optimal) {
        note(ib.objective >= ia.objective - 1e-9, fmt("desk %d ILP", t));
      }
    }
  }

  auto base = scenario_from_json({{"topology", kData + "/topologies/dt9.csv"},
                                  {"solvers", {"cg"}},
                                  {"baud_gbaud", {500, 200, 25}},
                                  {"k", 10}});
  auto other = base;
  other.mode = Mode::rwba;
  auto c = compare_modes(base, other);
  for (const auto& r : c.rows) note(r.throughput_b_bps >= r.throughput_a_bps - 1e-3, fmt("DT9 %g GBaud", r.baud_gbaud));
  std::string ratios;
  for (const auto& r : c.rows) ratios += fmt(" %.3f", r.ratio);
  return {violations == 0, fmt("%d comparisons, %d violations%s%s; DT9 RWBA/RWA at 500/200/25 GBaud:%s", tested,
                               violations, violations ? ", first: " : "", first.c_str(), ratios.c_str())};
}

Outcome formats_monotone() {
  auto s = scenario_from_json({{"topology", kData + "/topologies/dt9.csv"},
                               {"solvers", {"cg"}},
                               {"baud_gbaud", {25}},
                               {"k", 10}});
  const std::vector<std::size_t> formats{1, 2, 3, 4, 5, 6, 7, 8};
  s.mode = Mode::rwa;
  auto rwa = format_sweep(s, formats);
  s.mode = Mode::rwba;
  auto rwba = format_sweep(s, formats, &rwa);
  auto curve = [](const std::vector<ScenarioResult>& v) {
    std::vector<double> out;
    for (const auto& r : v) out.push_back(r.rows.at(0).failed() ? -1.0 : r.rows.at(0).throughput_bps);
    return out;
  };
  const auto a = curve(rwa);
  const auto b = curve(rwba);
  bool monotone = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || b[i] < 0) return {false, fmt("formats %zu failed", formats[i])};
    if (i > 0) monotone = monotone && a[i] >= a[i - 1] - 1e-3 && b[i] >= b[i - 1] - 1e-3;
  }
  const double gain_a = a.back() / a.front() - 1;
  const double gain_b = b.back() / b.front() - 1;
  const bool pass = monotone && gain_a > 0 && gain_b > 0 && gain_b > gain_a;
  return {pass, fmt("RWA %.1f -> %.1f Tb/s (+%.0f%%), RWBA %.1f -> %.1f Tb/s (+%.0f%%), monotone %s", a.front() / 1e12,
                    a.back() / 1e12, 100 * gain_a, b.front() / 1e12, b.back() / 1e12, 100 * gain_b,
                    monotone ? "yes" : "no")};
}

Outcome cg_scalability() {
  std::string detail;
  bool pass = true;
  for (Mode m : {Mode::rwa, Mode::rwba}) {
    double secs[2];
    int w[2];
    int i = 0;
    for (double baud : {200e9, 12.5e9}) {
      auto inst = named("dt14", 10, baud, m);
      auto t0 = std::chrono::steady_clock::now();
      auto r = run_cg(inst);
      secs[i] = seconds_since(t0);
      w[i] = inst.wavelengths;
      audit.cg(inst, r, fmt("DT14 %s W=%d", std::string(mode_name(m)).c_str(), inst.wavelengths));
      if (baud == 12.5e9) {
        bool capped = false;
        try {
          build_ilp(inst);
        } catch (const VariableCapExceeded& e) {
          capped = e.count() > IlpOptions{}.variable_cap;
        }
        if (!capped) pass = false;
        detail += fmt("%sILP at W=%d %s, ", detail.empty() ? "" : "; ", inst.wavelengths,
                      capped ? "exceeds the variable cap" : "was built");
      }
      ++i;
    }
    const bool ok = secs[1] <= 3 * secs[0] && secs[0] <= 120 && secs[1] <= 120 && w[0] == 75 && w[1] == 1200;
    pass = pass && ok;
    detail += fmt("%s CG %.1f s at W=%d, %.1f s at W=%d (ratio %.2f)", std::string(mode_name(m)).c_str(), secs[0], w[0],
                  secs[1], w[1], secs[1] / secs[0]);
  }
  return {pass, detail};
}

Outcome benchmark_dominance() {
  std::string detail;
  bool pass = true;
  for (Mode m : {Mode::rwa, Mode::rwba}) {
    auto inst = named("dt9", 10, 200e9, m);
    auto r = run_cg(inst);
    audit.cg(inst, r, fmt("DT9 %s", std::string(mode_name(m)).c_str()));
    for (Strategy st : {Strategy::ksp_ff, Strategy::ff_ksp}) {
      const int trials = 200;
      double sum = 0;
      int beaten = 0;
      for (int seed = 0; seed < trials; ++seed) {
        auto l = sequential_load(inst, st, static_cast<std::uint64_t>(seed));
        audit.load(inst, l, fmt("DT9 %s seed %d", strategy_name(st), seed));
        sum += l.throughput_bps;
        if (r.integer_th_bps >= l.throughput_bps) ++beaten;
      }
      const double mean = sum / trials;
      const bool ok = r.integer_th_bps >= mean && beaten >= 0.9 * trials;
      pass = pass && ok;
      detail += fmt("%s%s %s: CG %.1f vs mean %.1f Tb/s, CG >= trial in %d/%d", detail.empty() ? "" : "; ",
                    std::string(mode_name(m)).c_str(), strategy_name(st), r.integer_th_bps / 1e12, mean / 1e12,
                    beaten, trials);
    }
  }
  return {pass, detail};
}

Outcome feasibility() {
  // Extra coverage with transceiver budgets, which the runs above leave unlimited.
  std::mt19937_64 rng(99);
  for (int t = 0; t < 30; ++t) {
    auto inst = fixture::desk_instance(rng, kEnv);
    inst.transceivers = 1 + static_cast<long>(draw_below(rng, 10));
    audit.cg(inst, run_cg(inst), fmt("limited desk %d", t));
    for (Strategy st : {Strategy::ksp_ff, Strategy::ff_ksp}) {
      audit.load(inst, sequential_load(inst, st, t), fmt("limited desk %d %s", t, strategy_name(st)));
    }
  }
  for (Mode m : {Mode::rwa, Mode::rwba}) {
    auto inst = named("dt9", 10, 200e9, m, 300);
    audit.cg(inst, run_cg(inst), fmt("DT9 %s A=300", std::string(mode_name(m)).c_str()));
    audit.load(inst, sequential_load(inst, Strategy::ff_ksp, 1), "DT9 ff-ksp A=300");
  }
  return {audit.violations == 0 && audit.solutions > 0,
          fmt("%ld solutions audited, %ld violations%s%s", audit.solutions, audit.violations,
              audit.violations ? ", first: " : "", audit.first.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"wavelength-count mapping", wavelength_mapping},
      {"oracle equivalence at desk scale", desk_oracle},
      {"LP kernel correctness", lp_kernel},
      {"dB arithmetic and modulation thresholds", db_arithmetic},
      {"RWBA >= RWA dominance", rwba_dominance},
      {"modulation-flexibility monotonicity", formats_monotone},
      {"CG scalability", cg_scalability},
      {"benchmark dominance", benchmark_dominance},
      {"end-to-end feasibility", feasibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
