#pragma once

// Column generation over wavelength configurations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbcg/bench.hpp"
#include "mbcg/lp.hpp"
#include "mbcg/models.hpp"

namespace mbcg {

// ---------------------------------------------------------------------------
// Column pool

class ColumnPool {
 public:
  /// False (and no insertion) when an identical column is already pooled.
  bool add(WavelengthConfiguration c) {
    if (c.routes.empty()) return false;
    if (!keys_.insert(c.key()).second) return false;
    c.id = static_cast<int>(columns_.size());
    columns_.push_back(std::move(c));
    return true;
  }

  bool contains(const WavelengthConfiguration& c) const { return keys_.count(c.key()) > 0; }
  std::size_t size() const { return columns_.size(); }
  const WavelengthConfiguration& operator[](std::size_t i) const { return columns_.at(i); }
  const std::vector<WavelengthConfiguration>& columns() const { return columns_; }

 private:
  std::vector<WavelengthConfiguration> columns_;
  std::set<std::pair<int, std::vector<RouteId>>> keys_;
};

/// Seeds the pool from one kSP-FF loading: each used wavelength becomes a
/// column. At most min(|V|(|V|-1), W) columns.
inline ColumnPool initialize_columns(const Instance& inst, std::uint64_t seed = 0) {
  ColumnPool pool;
  const std::size_t n = static_cast<std::size_t>(inst.topology.node_count());
  const std::size_t cap = std::min(n * (n - 1), static_cast<std::size_t>(inst.wavelengths));
  const auto load = sequential_load(inst, Strategy::ksp_ff, seed);
  std::map<int, std::vector<RouteId>> by_wavelength;
  for (const auto& lp : load.lightpaths) by_wavelength[lp.wavelength].push_back(lp.route);
  for (auto& [w, routes] : by_wavelength) {
    if (pool.size() >= cap) break;
    pool.add(make_configuration(inst, routes, inst.band_of(w)));
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Pricing

enum class PricingRule {
  greedy,
  exact,
  /// Greedy first; exact search only when greedy finds nothing improving and
  /// the candidate count is small enough.
  hybrid,
};

inline const char* pricing_name(PricingRule r) {
  switch (r) {
    case PricingRule::greedy: return "greedy";
    case PricingRule::exact: return "exact";
    case PricingRule::hybrid: return "hybrid";
  }
  return "greedy";
}

inline PricingRule parse_pricing(std::string_view s) {
  if (s == "greedy") return PricingRule::greedy;
  if (s == "exact") return PricingRule::exact;
  if (s == "hybrid") return PricingRule::hybrid;
  throw ModelError("unknown pricing rule '" + std::string(s) + "'");
}

struct PricingCandidate {
  RouteId route;
  double weight;
};

struct PricingResult {
  /// Selected routes, ascending; empty when no node has positive weight.
  std::vector<RouteId> routes;
  std::optional<Band> band;
  double reduced_cost{0};
  bool exact{false};
};

namespace detail {

inline std::vector<PricingCandidate> pricing_candidates(const Instance& inst, const DualPrices& d, Band band) {
  std::vector<PricingCandidate> out;
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    const double w = d.demand[inst.routes.pair_of(r)] * inst.capacity_of(r, band) / kLpUnit - d.transceivers;
    if (w > 0) out.push_back({r, w});
  }
  auto lex = [&](RouteId a, RouteId b) {
    const auto& ra = inst.routes.route(a);
    const auto& rb = inst.routes.route(b);
    if (ra.span_total != rb.span_total) return ra.span_total < rb.span_total;
    if (ra.source != rb.source) return ra.source < rb.source;
    if (ra.destination != rb.destination) return ra.destination < rb.destination;
    return ra.index < rb.index;
  };
  std::sort(out.begin(), out.end(), [&](const PricingCandidate& a, const PricingCandidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return lex(a.route, b.route);
  });
  return out;
}

inline PricingResult greedy_mwis(const Instance& inst, const std::vector<PricingCandidate>& cands, double sigma_w) {
  PricingResult res;
  std::vector<char> used(inst.topology.link_count(), 0);
  double total = 0;
  for (const auto& c : cands) {
    const auto& links = inst.routes.route(c.route).links;
    bool ok = true;
    for (LinkId l : links) ok = ok && !used[l];
    if (!ok) continue;
    for (LinkId l : links) used[l] = 1;
    res.routes.push_back(c.route);
    total += c.weight;
  }
  std::sort(res.routes.begin(), res.routes.end());
  res.reduced_cost = total - sigma_w;
  return res;
}

inline PricingResult exact_mwis(const Instance& inst, const std::vector<PricingCandidate>& cands, double sigma_w,
                                double time_limit_seconds) {
  PricingResult res;
  res.exact = true;
  res.reduced_cost = -sigma_w;
  if (cands.empty()) return res;
  lp::LinearProgram mwis;
  std::map<LinkId, std::vector<lp::Term>> per_link;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const int v = mwis.add_variable(cands[i].weight, 0, 1, true);
    for (LinkId l : inst.routes.route(cands[i].route).links) per_link[l].push_back({v, 1.0});
  }
  for (auto& [l, terms] : per_link) {
    if (terms.size() > 1) mwis.add_row(std::move(terms), lp::Relation::less_equal, 1.0);
  }
  lp::SolveOptions opt;
  opt.time_limit_seconds = time_limit_seconds;
  auto s = lp::solve_milp(mwis, opt);
  if (!s.has_solution()) return res;
  res.exact = s.status == lp::Status::optimal;
  double total = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (s.values[i] > 0.5) {
      res.routes.push_back(cands[i].route);
      total += cands[i].weight;
    }
  }
  std::sort(res.routes.begin(), res.routes.end());
  res.reduced_cost = total - sigma_w;
  return res;
}

/// `escalate` makes the hybrid rule search exactly even after a positive greedy result.
inline PricingResult price_band(const Instance& inst, const DualPrices& d, Band band, PricingRule rule,
                                std::size_t exact_limit, double exact_time_limit, bool escalate = false) {
  const auto cands = pricing_candidates(inst, d, band);
  const double sigma_w = d.wavelengths[band_index(band)];
  PricingResult res;
  if (rule == PricingRule::exact) {
    res = exact_mwis(inst, cands, sigma_w, exact_time_limit);
  } else {
    res = greedy_mwis(inst, cands, sigma_w);
    if (rule == PricingRule::hybrid && (escalate || res.reduced_cost <= 0) && cands.size() <= exact_limit) {
      auto ex = exact_mwis(inst, cands, sigma_w, exact_time_limit);
      if (ex.reduced_cost > res.reduced_cost) res = ex;
    }
  }
  if (inst.mode == Mode::rwba) res.band = band;
  return res;
}

}  // namespace detail

struct PricingOptions {
  PricingRule rule{PricingRule::greedy};
  /// Largest candidate set searched exactly by the hybrid rule.
  std::size_t exact_candidate_limit{120};
  double exact_time_limit_seconds{5.0};
};

/// One max-weight independent set over all candidate routes.
inline PricingResult price_rwa(const DualPrices& d, const Instance& inst, const PricingOptions& opt = {}) {
  return detail::price_band(inst, d, Band::C, opt.rule, opt.exact_candidate_limit, opt.exact_time_limit_seconds);
}

/// One subproblem per band, best reduced cost wins, ties to U < L < C.
inline PricingResult price_rwba(const DualPrices& d, const Instance& inst, const PricingOptions& opt = {}) {
  PricingResult best;
  bool first = true;
  for (Band b : kBands) {
    auto r = detail::price_band(inst, d, b, opt.rule, opt.exact_candidate_limit, opt.exact_time_limit_seconds);
    if (first || r.reduced_cost > best.reduced_cost) {
      best = std::move(r);
      first = false;
    }
  }
  return best;
}

inline PricingResult price(const DualPrices& d, const Instance& inst, const PricingOptions& opt = {}) {
  return inst.mode == Mode::rwa ? price_rwa(d, inst, opt) : price_rwba(d, inst, opt);
}

// ---------------------------------------------------------------------------
// Wavelength packing

struct WavelengthSlot {
  int wavelength;
  int column;
};

struct WavelengthAssignment {
  std::vector<WavelengthSlot> slots;
  std::vector<Lightpath> lightpaths;
};

/// Groups copies of each used column on contiguous wavelengths, larger z first,
/// inside the column's band range (RWBA) or from index 0 (RWA).
inline WavelengthAssignment pack_wavelengths(const Instance& inst, const std::vector<WavelengthConfiguration>& columns,
                                             const std::vector<long>& z) {
  if (z.size() != columns.size()) throw ModelError("one multiplicity per column expected");
  std::vector<int> order;
  for (std::size_t c = 0; c < z.size(); ++c) {
    if (z[c] < 0) throw ModelError("negative column multiplicity");
    if (z[c] > 0) order.push_back(static_cast<int>(c));
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return z[a] > z[b]; });
  std::array<int, kBandCount> next{};
  for (Band b : kBands) next[band_index(b)] = inst.bands[band_index(b)].first;
  int next_rwa = 0;
  WavelengthAssignment out;
  for (int c : order) {
    const auto& col = columns[c];
    for (long copy = 0; copy < z[c]; ++copy) {
      int w;
      if (inst.mode == Mode::rwa) {
        w = next_rwa++;
        if (w >= inst.wavelengths) throw ModelError("wavelength budget exceeded while packing");
      } else {
        if (!col.band) throw ModelError("RWBA column without band");
        const auto& range = inst.bands[band_index(*col.band)];
        w = next[band_index(*col.band)]++;
        if (!range.contains(w)) throw ModelError("band " + std::string(band_name(*col.band)) + " budget exceeded while packing");
      }
      out.slots.push_back({w, c});
      const Band b = inst.band_of(w);
      for (RouteId r : col.routes) out.lightpaths.push_back({r, w, b, inst.capacity_of(r, b)});
    }
  }
  return out;
}

inline void write_assignment_csv(std::ostream& out, const Instance& inst, const WavelengthAssignment& a) {
  out << "wavelength_index,band,s,d,k\n";
  for (const auto& lp : a.lightpaths) {
    const auto& r = inst.routes.route(lp.route);
    out << lp.wavelength << ',' << band_name(lp.band) << ',' << inst.topology.node_name(r.source) << ','
        << inst.topology.node_name(r.destination) << ',' << r.index << '\n';
  }
}

// ---------------------------------------------------------------------------
// Driver

struct CgOptions {
  double epsilon{1e-6};
  std::size_t max_columns{2000};
  double time_limit_seconds{60.0};
  PricingOptions pricing;
  /// Admit the best column of every band per round (RWBA only).
  bool multi_column{false};
  double integer_gap{0.01};
  double integer_time_limit_seconds{10.0};
  /// Deterministic budget for the integer solve; -1 leaves only the clock.
  long integer_node_limit{500};
  /// After convergence, round up to this many fractional multiplicities one at
  /// a time (up or down, pricing again after each step). The columns found join
  /// the pool and the rounded point becomes a start for the integer solve.
  int dive_steps{32};
  double dive_time_limit_seconds{30.0};
  std::uint64_t init_seed{0};
};

/// Columns and multiplicities of an earlier solution over the same routes,
/// e.g. an RWA result handed to the RWBA run.
struct CgSeed {
  std::vector<std::vector<RouteId>> columns;
  std::vector<long> z;
  /// Band per column for RWBA seeds; copies go there first while it has room.
  std::vector<std::optional<Band>> bands;
};

enum class CgExit { converged, column_cap, time_cap, duplicate };

inline const char* exit_name(CgExit e) {
  switch (e) {
    case CgExit::converged: return "converged";
    case CgExit::column_cap: return "column_cap";
    case CgExit::time_cap: return "time_cap";
    case CgExit::duplicate: return "duplicate";
  }
  return "converged";
}

struct CgReport {
  int iterations{0};
  /// Relaxed RMP value (bit/s) after each solve.
  std::vector<double> bound_trajectory_bps;
  double relaxed_th_bps{0};
  double integer_th_bps{0};
  lp::Status integer_status{lp::Status::infeasible};
  double integer_gap{0};
  long integer_nodes{0};
  std::size_t initial_pool{0};
  std::size_t pool_size{0};
  CgExit exit{CgExit::converged};
  bool last_pricing_exact{false};
  double init_seconds{0};
  double pricing_loop_seconds{0};
  double integer_seconds{0};
  double packing_seconds{0};
  double total_seconds{0};
  std::vector<WavelengthConfiguration> columns;
  std::vector<long> z;
  WavelengthAssignment assignment;
};

inline CgSeed seed_from(const CgReport& r) {
  CgSeed s;
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    if (r.z[c] <= 0) continue;
    s.columns.push_back(r.columns[c].routes);
    s.z.push_back(r.z[c]);
    s.bands.push_back(r.columns[c].band);
  }
  return s;
}

namespace detail {

// The seed's routes that carry traffic in `band`, as a column of `inst`.
inline std::optional<WavelengthConfiguration> seed_column(const Instance& inst, const std::vector<RouteId>& routes,
                                                          std::optional<Band> band) {
  std::vector<RouteId> kept;
  for (RouteId r : routes) {
    if (r >= 0 && r < static_cast<RouteId>(inst.routes.size()) && inst.capacity_of(r, band.value_or(Band::C)) > 0) {
      kept.push_back(r);
    }
  }
  if (kept.empty() || find_clash(inst, kept)) return std::nullopt;
  return make_configuration(inst, std::move(kept), band);
}

inline void add_seed_columns(const Instance& inst, const CgSeed& seed, ColumnPool& pool) {
  for (const auto& routes : seed.columns) {
    if (inst.mode == Mode::rwa) {
      if (auto c = seed_column(inst, routes, std::nullopt)) pool.add(std::move(*c));
      continue;
    }
    for (Band b : kBands) {
      if (inst.band_budget(b) == 0) continue;
      if (auto c = seed_column(inst, routes, b)) pool.add(std::move(*c));
    }
  }
}

inline double start_throughput(const Instance& inst, const ColumnPool& pool, const RmpModel& rmp,
                               const std::vector<double>& x) {
  double th = lp::kInf;
  for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
    if (inst.demand[p] <= 0) continue;
    double carried = 0;
    for (std::size_t c = 0; c < pool.size(); ++c) carried += pool[c].capacity_for(p) / kLpUnit * x[rmp.column_vars[c]];
    th = std::min(th, carried / inst.demand[p]);
  }
  return std::isfinite(th) ? th : 0.0;
}

// Integer RMP point with the seed's copies in their own band, or else spread
// over the bands in U, L, C order.
inline std::vector<double> seed_start(const Instance& inst, const CgSeed& seed, const ColumnPool& pool,
                                      const RmpModel& rmp) {
  std::map<std::pair<int, std::vector<RouteId>>, int> index;
  for (std::size_t c = 0; c < pool.size(); ++c) index.emplace(pool[c].key(), static_cast<int>(c));
  std::vector<double> x(rmp.program.variable_count(), 0.0);
  std::array<long, kBandCount> left{};
  for (Band b : kBands) left[band_index(b)] = inst.band_budget(b);
  long rwa_left = inst.wavelengths;
  for (std::size_t s = 0; s < seed.columns.size() && s < seed.z.size(); ++s) {
    for (long copy = 0; copy < seed.z[s]; ++copy) {
      if (inst.mode == Mode::rwa) {
        auto c = seed_column(inst, seed.columns[s], std::nullopt);
        if (!c || rwa_left == 0) continue;
        auto it = index.find(c->key());
        if (it == index.end()) continue;
        x[rmp.column_vars[it->second]] += 1;
        --rwa_left;
        continue;
      }
      std::vector<Band> order;
      if (s < seed.bands.size() && seed.bands[s]) order.push_back(*seed.bands[s]);
      for (Band b : kBands) {
        if (order.empty() || b != order[0]) order.push_back(b);
      }
      for (Band b : order) {
        if (left[band_index(b)] == 0) continue;
        auto c = seed_column(inst, seed.columns[s], b);
        if (!c) continue;
        auto it = index.find(c->key());
        if (it == index.end()) continue;
        x[rmp.column_vars[it->second]] += 1;
        --left[band_index(b)];
        break;
      }
    }
  }
  x[rmp.th_var] = start_throughput(inst, pool, rmp, x);
  return x;
}

// Floors the relaxed multiplicities, then spends the leftover wavelengths one
// at a time on the column that covers most of the remaining shortfall against
// the relaxed throughput.
inline std::vector<double> round_and_fill(const Instance& inst, const ColumnPool& pool, const RmpModel& rmp,
                                          const std::vector<double>& relaxed) {
  const std::size_t n = pool.size();
  std::vector<double> x(rmp.program.variable_count(), 0.0);
  std::array<long, kBandCount> left{};
  long rwa_left = inst.wavelengths;
  for (Band b : kBands) left[band_index(b)] = inst.band_budget(b);
  long transceivers_left = inst.transceivers.value_or(std::numeric_limits<long>::max());
  auto room = [&](const WavelengthConfiguration& c) {
    if (c.transceivers() > transceivers_left) return false;
    return inst.mode == Mode::rwa ? rwa_left > 0 : left[band_index(*c.band)] > 0;
  };
  auto take = [&](std::size_t c) {
    x[rmp.column_vars[c]] += 1;
    transceivers_left -= pool[c].transceivers();
    if (inst.mode == Mode::rwa) --rwa_left;
    else --left[band_index(*pool[c].band)];
  };
  for (std::size_t c = 0; c < n; ++c) {
    auto copies = static_cast<long>(std::floor(relaxed[rmp.column_vars[c]] + 1e-9));
    for (long k = 0; k < copies && room(pool[c]); ++k) take(c);
  }
  const double target = relaxed[rmp.th_var];
  std::vector<double> carried(inst.routes.pair_count(), 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (const auto& [p, cap] : pool[c].pair_capacity) carried[p] += cap / kLpUnit * x[rmp.column_vars[c]];
  }
  while (true) {
    std::size_t best = n;
    double best_gain = 1e-12;
    for (std::size_t c = 0; c < n; ++c) {
      if (!room(pool[c])) continue;
      double gain = 0;
      for (const auto& [p, cap] : pool[c].pair_capacity) {
        const double need = target * inst.demand[p] - carried[p];
        if (need > 0) gain += std::min(need, cap / kLpUnit) / inst.demand[p];
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best == n) break;
    take(best);
    for (const auto& [p, cap] : pool[best].pair_capacity) carried[p] += cap / kLpUnit;
  }
  x[rmp.th_var] = start_throughput(inst, pool, rmp, x);
  return x;
}

// Add and swap moves on an integer point that lower a soft-min potential over
// the per-pair throughput ratios.
class StartImprover {
 public:
  StartImprover(const Instance& inst, const ColumnPool& pool, const RmpModel& rmp, double target)
      : inst_(inst), pool_(pool), rmp_(rmp), scale_(target > 0 ? target : 1.0) {
    for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
      if (inst.demand[p] > 0) active_.push_back(p);
    }
  }

  std::vector<double> run(std::vector<double> x, int max_moves = 4000) {
    load(x);
    auto best = x;
    double best_th = throughput();
    int moves = 0;
    for (double tau : {0.05, 0.02, 0.01, 0.005, 0.002}) {
      tau_ = tau;
      while (moves < max_moves && step()) {
        ++moves;
        const double th = throughput();
        if (th > best_th * (1 + 1e-12)) {
          best_th = th;
          for (std::size_t c = 0; c < pool_.size(); ++c) best[rmp_.column_vars[c]] = static_cast<double>(z_[c]);
        }
      }
    }
    best[rmp_.th_var] = start_throughput(inst_, pool_, rmp_, best);
    return best;
  }

 private:
  void load(const std::vector<double>& x) {
    const std::size_t n = pool_.size();
    z_.assign(n, 0);
    carried_.assign(inst_.routes.pair_count(), 0.0);
    used_.fill(0);
    transceivers_ = 0;
    for (std::size_t c = 0; c < n; ++c) {
      z_[c] = std::lround(x[rmp_.column_vars[c]]);
      for (long k = 0; k < z_[c]; ++k) apply(c, +1);
    }
  }

  int slot(std::size_t c) const { return inst_.mode == Mode::rwa ? 0 : band_index(*pool_[c].band); }

  long budget(int s) const {
    return inst_.mode == Mode::rwa ? inst_.wavelengths : inst_.band_budget(static_cast<Band>(s));
  }

  void apply(std::size_t c, int sign) {
    for (const auto& [p, cap] : pool_[c].pair_capacity) carried_[p] += sign * cap / kLpUnit;
    used_[slot(c)] += sign;
    transceivers_ += sign * pool_[c].transceivers();
  }

  bool fits(std::size_t add, std::optional<std::size_t> drop) const {
    long tr = transceivers_ + pool_[add].transceivers();
    std::array<long, kBandCount> used = used_;
    if (drop) {
      tr -= pool_[*drop].transceivers();
      used[slot(*drop)] -= 1;
    }
    if (inst_.transceivers && tr > *inst_.transceivers) return false;
    return used[slot(add)] + 1 <= budget(slot(add));
  }

  double ratio(PairId p, double carried) const { return carried / inst_.demand[p] / scale_; }
  double term(double u) const { return std::exp(-(u - ref_) / tau_); }

  // Potential change when column `add` gains one copy and `drop` (if any) loses one.
  double delta(std::size_t add, std::optional<std::size_t> drop) {
    touched_.clear();
    auto touch = [&](std::size_t c, double sign) {
      for (const auto& [p, cap] : pool_[c].pair_capacity) {
        if (inst_.demand[p] <= 0) continue;
        if (shift_[p] == 0 && std::find(touched_.begin(), touched_.end(), p) == touched_.end()) touched_.push_back(p);
        shift_[p] += sign * cap / kLpUnit;
      }
    };
    if (shift_.size() != carried_.size()) shift_.assign(carried_.size(), 0.0);
    touch(add, +1);
    if (drop) touch(*drop, -1);
    double d = 0;
    for (PairId p : touched_) {
      d += term(ratio(p, carried_[p] + shift_[p])) - term(ratio(p, carried_[p]));
      shift_[p] = 0;
    }
    return d;
  }

  bool step() {
    const std::size_t n = pool_.size();
    // Measure ratios from the current minimum so the exponentials stay in range.
    double low = lp::kInf;
    for (PairId p : active_) low = std::min(low, ratio(p, carried_[p]));
    ref_ = std::isfinite(low) ? low : 0.0;
    double best = -1e-12;
    std::size_t best_add = n;
    std::optional<std::size_t> best_drop;
    for (std::size_t a = 0; a < n; ++a) {
      if (fits(a, std::nullopt)) {
        const double d = delta(a, std::nullopt);
        if (d < best) {
          best = d;
          best_add = a;
          best_drop.reset();
        }
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (z_[r] == 0) continue;
      for (std::size_t a = 0; a < n; ++a) {
        if (a == r || !fits(a, r)) continue;
        const double d = delta(a, r);
        if (d < best) {
          best = d;
          best_add = a;
          best_drop = r;
        }
      }
    }
    if (best_add == n) return false;
    if (best_drop) {
      apply(*best_drop, -1);
      --z_[*best_drop];
    }
    apply(best_add, +1);
    ++z_[best_add];
    return true;
  }

  double throughput() const {
    double th = lp::kInf;
    for (PairId p : active_) th = std::min(th, carried_[p] / inst_.demand[p]);
    return std::isfinite(th) ? th : 0.0;
  }

  const Instance& inst_;
  const ColumnPool& pool_;
  const RmpModel& rmp_;
  double scale_;
  double tau_{0.05};
  double ref_{0};
  std::vector<PairId> active_;
  std::vector<long> z_;
  std::vector<double> carried_;
  std::vector<double> shift_;
  std::vector<PairId> touched_;
  std::array<long, kBandCount> used_{};
  long transceivers_{0};
};


// Rounds the relaxed multiplicities one column at a time, up or down depending
// on which keeps the better RMP value, re-running column generation after every
// step so the pool gains columns that suit integer points. Bounds on `rmp` are
// restored on return.
template <class Generate>
std::optional<std::vector<long>> dive(const Instance& inst, const ColumnPool& pool, RmpModel& rmp,
                                      const lp::Basis& start_basis, const std::vector<double>& relaxed,
                                      Generate& generate, int max_steps) {
  auto& prog = rmp.program;
  auto basis = start_basis;
  std::vector<double> x = relaxed;
  std::vector<long> lower(pool.size(), 0);
  std::vector<double> upper(pool.size(), lp::kInf);
  auto grow = [&] {
    lower.resize(pool.size(), 0);
    upper.resize(pool.size(), lp::kInf);
  };
  auto budget = [&](Band b) {
    return inst.mode == Mode::rwa ? static_cast<long>(inst.wavelengths) : static_cast<long>(inst.band_budget(b));
  };
  auto fits = [&](std::size_t c, long add) {
    long band = 0;
    long trx = 0;
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (inst.mode == Mode::rwa || pool[k].band == pool[c].band) band += lower[k];
      trx += lower[k] * pool[k].transceivers();
    }
    if (band + add > budget(pool[c].band.value_or(Band::C))) return false;
    return !inst.transceivers || trx + add * pool[c].transceivers() <= *inst.transceivers;
  };
  auto set = [&](std::size_t c) { prog.set_bounds(rmp.column_vars[c], static_cast<double>(lower[c]), upper[c]); };
  auto integral_point = [&](double slack) {
    std::vector<long> z(pool.size(), 0);
    for (std::size_t c = 0; c < pool.size(); ++c) z[c] = static_cast<long>(std::floor(x[rmp.column_vars[c]] + slack));
    return z;
  };
  std::optional<std::vector<long>> out;
  // Whole copies are kept.
  for (std::size_t c = 0; c < pool.size(); ++c) {
    lower[c] = static_cast<long>(std::floor(x[rmp.column_vars[c]] + 1e-9));
    set(c);
  }
  for (int step = 0;; ++step) {
    auto sol = generate(basis, false);
    if (!sol) break;
    x = sol->values;
    grow();
    if (step == max_steps) {
      out = integral_point(1e-6);
      break;
    }
    std::size_t pick = pool.size();
    double best = 1e-6;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const double v = x[rmp.column_vars[c]];
      const double frac = v - std::floor(v);
      if (frac <= 1e-6 || frac >= 1 - 1e-6) continue;
      if (frac > best) {
        best = frac;
        pick = c;
      }
    }
    if (pick == pool.size()) {
      out = integral_point(0.5);
      break;
    }
    const double v = x[rmp.column_vars[pick]];
    const long up = static_cast<long>(std::ceil(v));
    const long down = static_cast<long>(std::floor(v));
    const auto saved_lower = lower[pick];
    const auto saved_upper = upper[pick];
    double up_value = -lp::kInf;
    lp::Basis up_basis;
    if (fits(pick, up - lower[pick])) {
      lower[pick] = up;
      set(pick);
      up_basis = basis;
      if (auto r = generate(up_basis, false)) up_value = r->objective;
      grow();
      lower[pick] = saved_lower;
    }
    upper[pick] = static_cast<double>(down);
    set(pick);
    auto down_basis = basis;
    double down_value = -lp::kInf;
    if (auto r = generate(down_basis, false)) down_value = r->objective;
    grow();
    if (up_value > down_value) {
      upper[pick] = saved_upper;
      lower[pick] = up;
      set(pick);
      basis = std::move(up_basis);
    } else {
      basis = std::move(down_basis);
    }
    if (!std::isfinite(std::max(up_value, down_value))) break;
  }
  for (std::size_t c = 0; c < pool.size(); ++c) prog.set_bounds(rmp.column_vars[c], 0.0, lp::kInf);
  return out;
}

}  // namespace detail

/// Column generation followed by the integer solve. Every seed's columns join the
/// initial pool and its solution is offered as a start, so the result is never
/// worse than a seed that fits the instance.
inline CgReport run_cg(const Instance& inst, const CgOptions& opt, const std::vector<CgSeed>& seeds) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  inst.validate();
  CgReport rep;
  auto pool = initialize_columns(inst, opt.init_seed);
  for (const auto& seed : seeds) detail::add_seed_columns(inst, seed, pool);
  rep.initial_pool = pool.size();
  const auto t1 = clock::now();
  rep.init_seconds = lp::detail::seconds_since(t0);

  auto rmp = build_rmp(inst, pool.columns(), Integrality::relaxed);
  // Prices against the current RMP until no improving column is left. Returns
  // the last LP solution, or nothing when the RMP is infeasible (dive only).
  auto generate = [&](lp::Basis& warm, bool main) -> std::optional<lp::LpSolution> {
    while (true) {
      auto sol = lp::solve_lp(rmp.program, {}, warm.empty() ? nullptr : &warm);
      if (sol.status != lp::Status::optimal) {
        if (!main) return std::nullopt;
        throw ModelError(std::string("relaxed RMP: ") + lp::status_name(sol.status));
      }
      warm = sol.basis;
      if (main) {
        ++rep.iterations;
        rep.relaxed_th_bps = sol.objective * kLpUnit;
        rep.bound_trajectory_bps.push_back(rep.relaxed_th_bps);
      }
      const bool time_up = lp::detail::seconds_since(t1) > (main ? opt.time_limit_seconds : opt.time_limit_seconds + opt.dive_time_limit_seconds);
      if (pool.size() >= opt.max_columns || time_up) {
        if (main) rep.exit = pool.size() >= opt.max_columns ? CgExit::column_cap : CgExit::time_cap;
        return sol;
      }
      const auto duals = read_duals(rmp, inst, sol);
      bool added = false;
      bool duplicate = false;
      bool exact = true;
      auto price_round = [&](bool escalate) {
        std::vector<PricingResult> picks;
        auto band_pick = [&](Band b) {
          return detail::price_band(inst, duals, b, opt.pricing.rule, opt.pricing.exact_candidate_limit,
                                    opt.pricing.exact_time_limit_seconds, escalate);
        };
        if (inst.mode == Mode::rwa) {
          picks.push_back(band_pick(Band::C));
        } else if (opt.multi_column) {
          for (Band b : kBands) picks.push_back(band_pick(b));
        } else {
          for (Band b : kBands) {
            auto r = band_pick(b);
            if (picks.empty() || r.reduced_cost > picks[0].reduced_cost) picks.assign(1, std::move(r));
          }
        }
        duplicate = false;
        exact = true;
        for (auto& pick : picks) {
          exact = exact && pick.exact;
          if (pick.reduced_cost <= opt.epsilon || pick.routes.empty()) continue;
          auto col = make_configuration(inst, pick.routes, pick.band);
          if (!pool.add(col)) {
            duplicate = true;
            continue;
          }
          append_column(rmp, inst, pool[pool.size() - 1]);
          added = true;
        }
      };
      price_round(false);
      // A greedy column that is already pooled says nothing about optimality.
      if (!added && opt.pricing.rule == PricingRule::hybrid && !exact) price_round(true);
      if (main) rep.last_pricing_exact = exact;
      if (!added) {
        if (main) rep.exit = duplicate ? CgExit::duplicate : CgExit::converged;
        return sol;
      }
    }
  };
  lp::Basis basis;
  std::vector<double> relaxed_values = generate(basis, true)->values;
  const auto t2 = clock::now();
  rep.pricing_loop_seconds = std::chrono::duration<double>(t2 - t1).count();

  std::optional<std::vector<long>> dived;
  if (opt.dive_steps > 0) dived = detail::dive(inst, pool, rmp, basis, relaxed_values, generate, opt.dive_steps);

  auto irmp = build_rmp(inst, pool.columns(), Integrality::integer);
  relaxed_values.resize(irmp.program.variable_count(), 0.0);
  basis.variables.resize(irmp.program.variable_count(), lp::VarStatus::at_lower);
  lp::SolveOptions io;
  io.relative_gap = opt.integer_gap;
  io.time_limit_seconds = opt.integer_time_limit_seconds;
  io.node_limit = opt.integer_node_limit;
  detail::StartImprover improver(inst, pool, irmp, relaxed_values[irmp.th_var]);
  auto start = improver.run(detail::round_and_fill(inst, pool, irmp, relaxed_values));
  auto consider = [&](std::vector<double> x) {
    x = improver.run(std::move(x));
    if (x[irmp.th_var] > start[irmp.th_var]) start = std::move(x);
  };
  for (const auto& seed : seeds) consider(detail::seed_start(inst, seed, pool, irmp));
  if (dived) {
    std::vector<double> x(irmp.program.variable_count(), 0.0);
    for (std::size_t c = 0; c < pool.size(); ++c) x[irmp.column_vars[c]] = static_cast<double>((*dived)[c]);
    x[irmp.th_var] = detail::start_throughput(inst, pool, irmp, x);
    consider(std::move(x));
  }
  auto isol = lp::solve_milp(irmp.program, io, &basis, &start);
  rep.integer_status = isol.status;
  rep.integer_gap = isol.relative_gap;
  rep.integer_nodes = isol.nodes;
  rep.z.assign(pool.size(), 0);
  if (isol.has_solution()) {
    std::vector<double> x(irmp.program.variable_count(), 0.0);
    for (std::size_t c = 0; c < pool.size(); ++c) {
      rep.z[c] = std::lround(isol.values[irmp.column_vars[c]]);
      x[irmp.column_vars[c]] = static_cast<double>(rep.z[c]);
    }
    // Recomputed from the rounded multiplicities so solver noise does not leak into the report.
    rep.integer_th_bps = detail::start_throughput(inst, pool, irmp, x) * kLpUnit;
  }
  const auto t3 = clock::now();
  rep.integer_seconds = std::chrono::duration<double>(t3 - t2).count();

  rep.columns = pool.columns();
  rep.pool_size = pool.size();
  rep.assignment = pack_wavelengths(inst, rep.columns, rep.z);
  rep.packing_seconds = lp::detail::seconds_since(t3);
  rep.total_seconds = lp::detail::seconds_since(t0);
  return rep;
}

inline CgReport run_cg(const Instance& inst, const CgOptions& opt = {}, const CgSeed* seed = nullptr) {
  return seed ? run_cg(inst, opt, std::vector<CgSeed>{*seed}) : run_cg(inst, opt, std::vector<CgSeed>{});
}

inline nlohmann::json to_json(const Instance& inst, const CgReport& r) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t c = 0; c < r.columns.size(); ++c) {
    const auto& col = r.columns[c];
    nlohmann::json paths = nlohmann::json::array();
    for (RouteId id : col.routes) paths.push_back(route_label(inst.topology, inst.routes.route(id)));
    cols.push_back({{"id", col.id},
                    {"band", col.band ? nlohmann::json(band_name(*col.band)) : nlohmann::json(nullptr)},
                    {"paths", paths},
                    {"transceivers", col.transceivers()},
                    {"z", r.z[c]}});
  }
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& s : r.assignment.slots) slots.push_back({{"wavelength", s.wavelength}, {"column", s.column}});
  return {{"iterations", r.iterations},
          {"bound_trajectory_bps", r.bound_trajectory_bps},
          {"relaxed_th_bps", r.relaxed_th_bps},
          {"integer_th_bps", r.integer_th_bps},
          {"integer_status", lp::status_name(r.integer_status)},
          {"integer_gap", r.integer_gap},
          {"integer_nodes", r.integer_nodes},
          {"initial_pool", r.initial_pool},
          {"pool_size", r.pool_size},
          {"exit", exit_name(r.exit)},
          {"seconds",
           {{"init", r.init_seconds},
            {"pricing_loop", r.pricing_loop_seconds},
            {"integer", r.integer_seconds},
            {"packing", r.packing_seconds},
            {"total", r.total_seconds}}},
          {"columns", cols},
          {"assignment", slots}};
}

}  // namespace mbcg
