#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbcg/lp.hpp"
#include "mbcg/phy.hpp"
#include "mbcg/routes.hpp"
#include "mbcg/topology.hpp"

namespace mbcg {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Capacities enter the LPs in Gb/s to keep coefficients near 1.
inline constexpr double kLpUnit = 1e9;

// ---------------------------------------------------------------------------
// Instance

struct Instance {
  NetworkTopology topology;
  RouteSet routes;
  CapacityMatrix capacity;
  /// Normalized demand per pair id of `routes`.
  std::vector<double> demand;
  Mode mode{Mode::rwa};
  int wavelengths{0};
  /// Wavelength index ranges per band; sizes are the per-band budgets W_b.
  BandPartition bands{};
  /// Transceiver budget A; empty means unlimited.
  std::optional<long> transceivers;
  double baud_hz{0};

  int band_budget(Band b) const { return bands[band_index(b)].count; }

  Band band_of(int w) const {
    for (const auto& r : bands) {
      if (r.contains(w)) return r.band;
    }
    throw ModelError("wavelength " + std::to_string(w) + " outside every band");
  }

  /// Capacity (bit/s) of route r on band b; RWA ignores the band.
  double capacity_of(RouteId r, Band b) const {
    return mode == Mode::rwa ? capacity.rwa(r) : capacity.at(r, b);
  }

  void validate() const {
    if (demand.size() != routes.pair_count()) throw ModelError("demand profile does not match the pair list");
    double sum = 0;
    for (double d : demand) {
      if (!(d >= 0) || !std::isfinite(d)) throw ModelError("demand entries must be finite and nonnegative");
      sum += d;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ModelError("demand profile must sum to 1");
    if (capacity.route_count() != routes.size()) throw ModelError("capacity matrix does not match the route set");
    if (wavelengths < 0) throw ModelError("negative wavelength count");
    int total = 0;
    int next = 0;
    for (const auto& r : bands) {
      if (r.count < 0 || r.first != next) throw ModelError("band ranges must be contiguous");
      next += r.count;
      total += r.count;
    }
    if (total != wavelengths) throw ModelError("band budgets do not add up to W");
    if (transceivers && *transceivers < 1) throw ModelError("transceiver budget must be at least 1");
    for (const auto& r : routes.routes()) {
      for (LinkId l : r.links) {
        if (l < 0 || l >= topology.link_count()) throw ModelError("route references an unknown link");
      }
    }
  }
};

inline std::vector<NodePair> all_ordered_pairs(const NetworkTopology& topo) {
  std::vector<NodePair> pairs;
  for (NodeId s = 0; s < topo.node_count(); ++s) {
    for (NodeId d = 0; d < topo.node_count(); ++d) {
      if (s != d) pairs.push_back({s, d});
    }
  }
  return pairs;
}

inline std::vector<double> uniform_demand(std::size_t pairs) {
  return std::vector<double>(pairs, pairs ? 1.0 / static_cast<double>(pairs) : 0.0);
}

/// Scales nonnegative weights to sum to 1.
inline std::vector<double> normalize_demand(std::vector<double> w) {
  double sum = 0;
  for (double v : w) {
    if (!(v >= 0) || !std::isfinite(v)) throw ModelError("demand weights must be finite and nonnegative");
    sum += v;
  }
  if (sum <= 0) throw ModelError("demand weights sum to zero");
  for (double& v : w) v /= sum;
  return w;
}

struct InstanceSpec {
  int k{3};
  Mode mode{Mode::rwa};
  double baud_hz{25e9};
  std::size_t formats_allowed{8};
  std::optional<long> transceivers;
  /// Overrides the grid's W (bands re-partitioned evenly).
  std::optional<int> wavelengths;
  /// Overrides per-band budgets (U, L, C).
  std::optional<std::array<int, kBandCount>> band_wavelengths;
  /// Demand pairs; all ordered pairs when empty.
  std::vector<NodePair> pairs;
  /// Demand weights per entry of `pairs` (or of all pairs); uniform when empty.
  std::vector<double> weights;
};

inline BandPartition partition_from_counts(const std::array<int, kBandCount>& counts) {
  BandPartition p{};
  int first = 0;
  for (Band b : kBands) {
    const int c = counts[band_index(b)];
    if (c < 0) throw ModelError("negative band budget");
    p[band_index(b)] = {b, first, c};
    first += c;
  }
  return p;
}

/// Builds routes, grid and capacities from the physical environment.
inline Instance make_instance(const NetworkTopology& topo, const PhysicalEnvironment& env, const InstanceSpec& spec) {
  const auto pairs = spec.pairs.empty() ? all_ordered_pairs(topo) : spec.pairs;
  RouteSet routes(topo, spec.k, pairs);
  const auto grid = env.grid(spec.baud_hz);
  if (spec.formats_allowed < 1 || spec.formats_allowed > env.modulation.size()) {
    throw ModelError("formats_allowed must be between 1 and " + std::to_string(env.modulation.size()));
  }
  auto capacity = capacity_matrix(routes, env, grid, spec.mode, spec.formats_allowed);
  Instance inst{topo, std::move(routes), std::move(capacity), {}, spec.mode, grid.channel_count, grid.bands,
                spec.transceivers, spec.baud_hz};
  if (spec.band_wavelengths) {
    inst.bands = partition_from_counts(*spec.band_wavelengths);
    inst.wavelengths = 0;
    for (int c : *spec.band_wavelengths) inst.wavelengths += c;
  } else if (spec.wavelengths) {
    inst.wavelengths = *spec.wavelengths;
    inst.bands = partition_bands(*spec.wavelengths);
  }
  inst.demand = spec.weights.empty() ? uniform_demand(inst.routes.pair_count()) : normalize_demand(spec.weights);
  inst.validate();
  return inst;
}

/// Instance with an explicit capacity matrix (bit/s per route and band).
inline Instance make_instance(const NetworkTopology& topo, RouteSet routes, CapacityMatrix capacity,
                              std::vector<double> demand, Mode mode, const std::array<int, kBandCount>& band_wavelengths,
                              std::optional<long> transceivers = std::nullopt) {
  Instance inst{topo, std::move(routes), std::move(capacity), std::move(demand), mode, 0,
                partition_from_counts(band_wavelengths), transceivers, 0};
  for (int c : band_wavelengths) inst.wavelengths += c;
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// Wavelength configurations and lightpaths

/// A set of link-disjoint routes sharing one wavelength. The band is set for
/// RWBA columns only.
struct WavelengthConfiguration {
  int id{-1};
  std::optional<Band> band;
  /// Member routes, ascending.
  std::vector<RouteId> routes;
  /// T_{s,d,c} in bit/s, one entry per pair with positive capacity, ascending pair id.
  std::vector<std::pair<PairId, double>> pair_capacity;

  int transceivers() const { return static_cast<int>(routes.size()); }

  double capacity_for(PairId p) const {
    for (const auto& [q, c] : pair_capacity) {
      if (q == p) return c;
    }
    return 0.0;
  }

  auto key() const { return std::make_pair(band ? band_index(*band) : -1, routes); }
};

/// First pair of routes that share a link, if any.
inline std::optional<std::pair<RouteId, RouteId>> find_clash(const Instance& inst, const std::vector<RouteId>& routes) {
  std::map<LinkId, RouteId> owner;
  for (RouteId r : routes) {
    for (LinkId l : inst.routes.route(r).links) {
      auto [it, fresh] = owner.emplace(l, r);
      if (!fresh) return std::make_pair(it->second, r);
    }
  }
  return std::nullopt;
}

/// Builds a column, computing T_{s,d,c} and a_c from the capacity matrix.
inline WavelengthConfiguration make_configuration(const Instance& inst, std::vector<RouteId> routes,
                                                  std::optional<Band> band) {
  if (inst.mode == Mode::rwba && !band) throw ModelError("RWBA column without band");
  if (inst.mode == Mode::rwa) band.reset();
  std::sort(routes.begin(), routes.end());
  if (std::adjacent_find(routes.begin(), routes.end()) != routes.end()) throw ModelError("column repeats a route");
  for (RouteId r : routes) {
    if (r < 0 || r >= static_cast<RouteId>(inst.routes.size())) throw ModelError("column references unknown route");
  }
  if (auto c = find_clash(inst, routes)) {
    throw ModelError("column routes " + std::to_string(c->first) + " and " + std::to_string(c->second) +
                     " share a link");
  }
  WavelengthConfiguration col;
  col.band = band;
  col.routes = std::move(routes);
  std::map<PairId, double> cap;
  for (RouteId r : col.routes) {
    const double c = inst.capacity_of(r, band.value_or(Band::C));
    if (c > 0) cap[inst.routes.pair_of(r)] += c;
  }
  col.pair_capacity.assign(cap.begin(), cap.end());
  return col;
}

struct Lightpath {
  RouteId route;
  int wavelength;
  Band band;
  double capacity_bps;
};

struct LightpathCheck {
  bool ok{true};
  std::vector<std::string> problems;
  double throughput_bps{0};
  long transceivers{0};
  std::vector<double> pair_capacity_bps;
};

/// Throughput of a per-pair capacity vector: min over demanded pairs of T/D.
inline double throughput_of(const Instance& inst, const std::vector<double>& pair_capacity_bps) {
  double th = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < inst.demand.size(); ++p) {
    if (inst.demand[p] > 0) th = std::min(th, pair_capacity_bps.at(p) / inst.demand[p]);
  }
  return std::isfinite(th) ? th : 0.0;
}

/// Independent feasibility audit: clash freedom per (link, wavelength), band
/// ranges, transceiver budget, and recomputed throughput.
inline LightpathCheck check_lightpaths(const Instance& inst, const std::vector<Lightpath>& lps) {
  LightpathCheck out;
  out.pair_capacity_bps.assign(inst.routes.pair_count(), 0.0);
  std::set<std::pair<LinkId, int>> used;
  auto fail = [&](std::string msg) {
    out.ok = false;
    out.problems.push_back(std::move(msg));
  };
  for (const auto& lp : lps) {
    if (lp.route < 0 || lp.route >= static_cast<RouteId>(inst.routes.size())) {
      fail("unknown route " + std::to_string(lp.route));
      continue;
    }
    if (lp.wavelength < 0 || lp.wavelength >= inst.wavelengths) {
      fail("wavelength " + std::to_string(lp.wavelength) + " out of range");
      continue;
    }
    if (!inst.bands[band_index(lp.band)].contains(lp.wavelength)) {
      fail("wavelength " + std::to_string(lp.wavelength) + " outside band " + std::string(band_name(lp.band)));
    }
    for (LinkId l : inst.routes.route(lp.route).links) {
      if (!used.emplace(l, lp.wavelength).second) {
        fail("link " + std::to_string(l) + " wavelength " + std::to_string(lp.wavelength) + " double-booked");
      }
    }
    const double expected = inst.capacity_of(lp.route, lp.band);
    if (std::abs(expected - lp.capacity_bps) > 1e-6 * std::max(1.0, expected)) {
      fail("lightpath capacity disagrees with the capacity matrix");
    }
    out.pair_capacity_bps[inst.routes.pair_of(lp.route)] += expected;
  }
  out.transceivers = static_cast<long>(lps.size());
  if (inst.transceivers && out.transceivers > *inst.transceivers) fail("transceiver budget exceeded");
  out.throughput_bps = throughput_of(inst, out.pair_capacity_bps);
  return out;
}

// ---------------------------------------------------------------------------
// ILP (path formulation)

struct IlpOptions {
  std::size_t variable_cap{1'500'000};
  /// Wavelengths of one band are interchangeable; order them by lightpath count
  /// so branch and bound does not revisit relabelled solutions.
  bool symmetry_breaking{true};
  /// Adds integer lightpath counts N_r = sum_w delta_{r,w} and branches on them
  /// before the individual deltas.
  bool route_counts{true};
  /// One-lightpath-per-wavelength rows for sets of pairwise clashing routes that
  /// share no common link. Skipped above `clique_route_limit` routes.
  bool clique_rows{true};
  std::size_t clique_route_limit{200};
  std::size_t clique_limit{5000};
};

class VariableCapExceeded : public ModelError {
 public:
  VariableCapExceeded(std::size_t count, std::size_t cap)
      : ModelError("ILP needs " + std::to_string(count) + " variables, above the cap of " + std::to_string(cap)),
        count_(count) {}
  std::size_t count() const { return count_; }

 private:
  std::size_t count_;
};

inline std::size_t ilp_variable_count(const Instance& inst) {
  return 1 + inst.routes.pair_count() + inst.routes.size() * static_cast<std::size_t>(inst.wavelengths);
}

struct IlpModel {
  lp::LinearProgram program;
  int th_var{-1};
  /// T_{s,d} per pair id.
  std::vector<int> pair_vars;
  /// delta_{r,w} at index r * W + w.
  int first_delta{0};
  int wavelengths{0};
  /// N_r per route when IlpOptions::route_counts is set.
  std::vector<int> count_vars;

  int delta(RouteId r, int w) const { return first_delta + r * wavelengths + w; }
};

inline std::string pair_tag(const Instance& inst, PairId p) {
  const auto& np = inst.routes.pair(p);
  return inst.topology.node_name(np.source) + "," + inst.topology.node_name(np.destination);
}

// Maximal sets of pairwise link-sharing routes (Bron-Kerbosch with pivoting),
// keeping those not already covered by a single link.
inline std::vector<std::vector<RouteId>> conflict_cliques(const Instance& inst,
                                                          const std::vector<std::vector<RouteId>>& on_link,
                                                          std::size_t limit) {
  const auto n = static_cast<int>(inst.routes.size());
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& rs : on_link) {
    for (RouteId a : rs) {
      for (RouteId b : rs) {
        if (a != b) adj[a][b] = 1;
      }
    }
  }
  std::vector<std::vector<RouteId>> out;
  std::vector<RouteId> current;
  auto covered = [&](const std::vector<RouteId>& q) {
    for (LinkId l : inst.routes.route(q[0]).links) {
      bool all = true;
      for (RouteId r : q) all = all && route_uses_link(inst.routes.route(r), l);
      if (all) return true;
    }
    return false;
  };
  std::function<void(std::vector<RouteId>, std::vector<RouteId>)> expand = [&](std::vector<RouteId> p,
                                                                                std::vector<RouteId> x) {
    if (out.size() >= limit) return;
    if (p.empty() && x.empty()) {
      if (current.size() >= 3 && !covered(current)) {
        auto q = current;
        std::sort(q.begin(), q.end());
        out.push_back(std::move(q));
      }
      return;
    }
    RouteId pivot = p.empty() ? x[0] : p[0];
    std::size_t most = 0;
    for (const auto* set : {&p, &x}) {
      for (RouteId u : *set) {
        std::size_t d = 0;
        for (RouteId v : p) d += adj[u][v];
        if (d > most) {
          most = d;
          pivot = u;
        }
      }
    }
    const auto candidates = p;
    for (RouteId v : candidates) {
      if (adj[pivot][v]) continue;
      std::vector<RouteId> p2;
      std::vector<RouteId> x2;
      for (RouteId u : p) {
        if (adj[v][u]) p2.push_back(u);
      }
      for (RouteId u : x) {
        if (adj[v][u]) x2.push_back(u);
      }
      current.push_back(v);
      expand(std::move(p2), std::move(x2));
      current.pop_back();
      p.erase(std::find(p.begin(), p.end(), v));
      x.push_back(v);
    }
  };
  std::vector<RouteId> all(n);
  for (int r = 0; r < n; ++r) all[r] = r;
  expand(all, {});
  std::sort(out.begin(), out.end());
  return out;
}

inline IlpModel build_ilp(const Instance& inst, const IlpOptions& opt = {}) {
  inst.validate();
  const std::size_t count = ilp_variable_count(inst) + (opt.route_counts ? inst.routes.size() : 0);
  if (count > opt.variable_cap) throw VariableCapExceeded(count, opt.variable_cap);
  IlpModel m;
  auto& lp = m.program;
  const int W = inst.wavelengths;
  m.wavelengths = W;
  m.th_var = lp.add_variable(1.0, 0.0, lp::kInf, false, "TH");
  for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
    m.pair_vars.push_back(lp.add_variable(0.0, 0.0, lp::kInf, false, "T[" + pair_tag(inst, p) + "]"));
  }
  m.first_delta = lp.variable_count();
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    for (int w = 0; w < W; ++w) lp.add_variable(0.0, 0.0, 1.0, true);
  }
  // D_hat * TH <= T_{s,d}
  for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
    if (inst.demand[p] <= 0) continue;
    lp.add_row({{m.th_var, inst.demand[p]}, {m.pair_vars[p], -1.0}}, lp::Relation::less_equal, 0.0,
               "demand[" + pair_tag(inst, p) + "]");
  }
  // T_{s,d} = sum C delta
  for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
    std::vector<lp::Term> terms{{m.pair_vars[p], 1.0}};
    for (RouteId r : inst.routes.routes_of(p)) {
      for (int w = 0; w < W; ++w) {
        const double c = inst.capacity_of(r, inst.band_of(w)) / kLpUnit;
        if (c > 0) terms.push_back({m.delta(r, w), -c});
      }
    }
    lp.add_row(std::move(terms), lp::Relation::equal, 0.0, "capacity[" + pair_tag(inst, p) + "]");
  }
  // One lightpath per (link, wavelength).
  std::vector<std::vector<RouteId>> on_link(inst.topology.link_count());
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    for (LinkId l : inst.routes.route(r).links) on_link[l].push_back(r);
  }
  for (LinkId l = 0; l < inst.topology.link_count(); ++l) {
    if (on_link[l].size() < 2) continue;
    for (int w = 0; w < W; ++w) {
      std::vector<lp::Term> terms;
      for (RouteId r : on_link[l]) terms.push_back({m.delta(r, w), 1.0});
      lp.add_row(std::move(terms), lp::Relation::less_equal, 1.0,
                 "clash[" + std::to_string(l) + "," + std::to_string(w) + "]");
    }
  }
  if (opt.route_counts) {
    for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
      const int n = lp.add_variable(0.0, 0.0, W, true, "N[" + std::to_string(r) + "]");
      lp.set_priority(n, 1);
      m.count_vars.push_back(n);
      std::vector<lp::Term> terms{{n, 1.0}};
      for (int w = 0; w < W; ++w) terms.push_back({m.delta(r, w), -1.0});
      lp.add_row(std::move(terms), lp::Relation::equal, 0.0, "count[" + std::to_string(r) + "]");
    }
  }
  if (opt.clique_rows && inst.routes.size() <= opt.clique_route_limit) {
    const auto cliques = conflict_cliques(inst, on_link, opt.clique_limit);
    for (std::size_t q = 0; q < cliques.size(); ++q) {
      for (int w = 0; w < W; ++w) {
        std::vector<lp::Term> terms;
        for (RouteId r : cliques[q]) terms.push_back({m.delta(r, w), 1.0});
        lp.add_row(std::move(terms), lp::Relation::less_equal, 1.0,
                   "clique[" + std::to_string(q) + "," + std::to_string(w) + "]");
      }
    }
  }
  if (opt.symmetry_breaking) {
    for (int w = 0; w + 1 < W; ++w) {
      if (inst.band_of(w) != inst.band_of(w + 1)) continue;
      std::vector<lp::Term> terms;
      for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
        terms.push_back({m.delta(r, w), 1.0});
        terms.push_back({m.delta(r, w + 1), -1.0});
      }
      lp.add_row(std::move(terms), lp::Relation::greater_equal, 0.0, "order[" + std::to_string(w) + "]");
    }
  }
  if (inst.transceivers) {
    std::vector<lp::Term> terms;
    for (int j = m.first_delta; j < m.first_delta + static_cast<int>(inst.routes.size()) * W; ++j) terms.push_back({j, 1.0});
    lp.add_row(std::move(terms), lp::Relation::less_equal, static_cast<double>(*inst.transceivers), "transceivers");
  }
  return m;
}

/// Lightpaths selected by an ILP solution.
inline std::vector<Lightpath> decode_ilp(const Instance& inst, const IlpModel& m, const std::vector<double>& x) {
  std::vector<Lightpath> out;
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    for (int w = 0; w < m.wavelengths; ++w) {
      if (x.at(m.delta(r, w)) > 0.5) {
        const Band b = inst.band_of(w);
        out.push_back({r, w, b, inst.capacity_of(r, b)});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Restricted master problem

enum class Integrality { relaxed, integer };

struct RmpRows {
  /// Row of each pair's demand-capacity constraint; -1 when D_hat = 0.
  std::vector<int> demand;
  std::optional<int> transceivers;
  /// Wavelength budget row per band (RWBA), or the single row in slot C (RWA).
  std::array<std::optional<int>, kBandCount> wavelengths;
};

struct RmpModel {
  lp::LinearProgram program;
  RmpRows rows;
  int th_var{-1};
  std::vector<int> column_vars;
  Integrality integrality{Integrality::relaxed};
};

inline int wavelength_row(const RmpModel& m, const Instance& inst, const WavelengthConfiguration& c) {
  const int slot = inst.mode == Mode::rwa ? band_index(Band::C) : band_index(*c.band);
  return *m.rows.wavelengths[slot];
}

/// Adds z_c to an RMP.
inline int append_column(RmpModel& m, const Instance& inst, const WavelengthConfiguration& c) {
  if (inst.mode == Mode::rwba && !c.band) throw ModelError("RWBA column without band");
  for (RouteId r : c.routes) {
    if (r < 0 || r >= static_cast<RouteId>(inst.routes.size())) throw ModelError("column references unknown route");
  }
  if (c.routes.empty()) throw ModelError("empty column");
  auto& lp = m.program;
  const int z = lp.add_variable(0.0, 0.0, lp::kInf, m.integrality == Integrality::integer,
                                "z[" + std::to_string(m.column_vars.size()) + "]");
  for (const auto& [p, cap] : c.pair_capacity) {
    const int row = m.rows.demand.at(p);
    if (row >= 0) lp.add_term(row, z, -cap / kLpUnit);
  }
  if (m.rows.transceivers) lp.add_term(*m.rows.transceivers, z, c.transceivers());
  lp.add_term(wavelength_row(m, inst, c), z, 1.0);
  m.column_vars.push_back(z);
  return z;
}

inline RmpModel build_rmp(const Instance& inst, const std::vector<WavelengthConfiguration>& columns,
                          Integrality integrality) {
  inst.validate();
  RmpModel m;
  m.integrality = integrality;
  auto& lp = m.program;
  m.th_var = lp.add_variable(1.0, 0.0, lp::kInf, false, "TH");
  m.rows.demand.assign(inst.routes.pair_count(), -1);
  for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
    if (inst.demand[p] <= 0) continue;
    m.rows.demand[p] = lp.add_row({{m.th_var, inst.demand[p]}}, lp::Relation::less_equal, 0.0,
                                  "demand[" + pair_tag(inst, p) + "]");
  }
  if (inst.transceivers) {
    m.rows.transceivers = lp.add_row({}, lp::Relation::less_equal, static_cast<double>(*inst.transceivers), "transceivers");
  }
  if (inst.mode == Mode::rwa) {
    m.rows.wavelengths[band_index(Band::C)] =
        lp.add_row({}, lp::Relation::less_equal, static_cast<double>(inst.wavelengths), "wavelengths");
  } else {
    for (Band b : kBands) {
      m.rows.wavelengths[band_index(b)] = lp.add_row({}, lp::Relation::less_equal, static_cast<double>(inst.band_budget(b)),
                                                     "wavelengths[" + std::string(band_name(b)) + "]");
    }
  }
  for (const auto& c : columns) append_column(m, inst, c);
  return m;
}

/// Duals of an RMP solve, in LP units (TH measured in Gb/s).
struct DualPrices {
  std::vector<double> demand;
  double transceivers{0};
  std::array<double, kBandCount> wavelengths{};
};

inline DualPrices read_duals(const RmpModel& m, const Instance& inst, const lp::LpSolution& s) {
  DualPrices d;
  d.demand.assign(m.rows.demand.size(), 0.0);
  for (std::size_t p = 0; p < m.rows.demand.size(); ++p) {
    if (m.rows.demand[p] >= 0) d.demand[p] = s.duals.at(m.rows.demand[p]);
  }
  if (m.rows.transceivers) d.transceivers = s.duals.at(*m.rows.transceivers);
  if (inst.mode == Mode::rwa) {
    d.wavelengths.fill(s.duals.at(*m.rows.wavelengths[band_index(Band::C)]));
  } else {
    for (Band b : kBands) d.wavelengths[band_index(b)] = s.duals.at(*m.rows.wavelengths[band_index(b)]);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Instance bundle I/O

inline nlohmann::json demand_to_json(const Instance& inst) {
  nlohmann::json arr = nlohmann::json::array();
  for (PairId p = 0; p < static_cast<PairId>(inst.routes.pair_count()); ++p) {
    const auto& np = inst.routes.pair(p);
    arr.push_back({{"s", inst.topology.node_name(np.source)},
                   {"d", inst.topology.node_name(np.destination)},
                   {"weight", inst.demand[p]}});
  }
  return arr;
}

struct InstanceBundle {
  NetworkTopology topology;
  PhysicalEnvironment phy;
  InstanceSpec spec;
};

inline std::optional<long> parse_transceivers(const nlohmann::json& v) {
  if (v.is_null() || (v.is_string() && (v == "inf" || v == "unlimited"))) return std::nullopt;
  if (v.is_number_integer() && v.get<long>() >= 1) return v.get<long>();
  throw ModelError("transceivers must be a positive integer or \"inf\"");
}

/// Reads {topology, phy, k, mode, baud_gbaud, formats_allowed, transceivers,
/// wavelengths | band_wavelengths, demand}. Relative paths resolve against `base`.
inline InstanceBundle instance_bundle_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  try {
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_relative() ? base / path : path;
    };
    const auto& t = j.at("topology");
    NetworkTopology topo = t.is_string() ? load_topology(resolve(t.get<std::string>())) : parse_topology_json(t);
    PhysicalEnvironment phy;
    if (auto it = j.find("phy"); it != j.end()) {
      if (it->is_string()) {
        std::ifstream in(resolve(it->get<std::string>()));
        if (!in) throw ModelError("cannot open phy config " + it->get<std::string>());
        phy = physical_environment_from_json(nlohmann::json::parse(in));
      } else {
        phy = physical_environment_from_json(*it);
      }
    }
    InstanceSpec spec;
    spec.k = j.value("k", spec.k);
    if (spec.k < 1) throw ModelError("k must be at least 1");
    spec.mode = parse_mode(j.value("mode", std::string("rwa")));
    spec.baud_hz = j.value("baud_gbaud", 25.0) * 1e9;
    spec.formats_allowed = j.value("formats_allowed", std::size_t{8});
    if (j.contains("transceivers")) spec.transceivers = parse_transceivers(j.at("transceivers"));
    if (j.contains("wavelengths")) spec.wavelengths = j.at("wavelengths").get<int>();
    if (j.contains("band_wavelengths")) spec.band_wavelengths = j.at("band_wavelengths").get<std::array<int, 3>>();
    if (auto it = j.find("demand"); it != j.end() && !(it->is_string() && *it == "uniform")) {
      for (const auto& e : *it) {
        spec.pairs.push_back({topo.find_node(e.at("s").get<std::string>()).value_or(-1),
                              topo.find_node(e.at("d").get<std::string>()).value_or(-1)});
        if (spec.pairs.back().source < 0 || spec.pairs.back().destination < 0) {
          throw ModelError("demand references an unknown node");
        }
        spec.weights.push_back(e.value("weight", 1.0));
      }
    }
    return {std::move(topo), std::move(phy), std::move(spec)};
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("instance json: ") + e.what());
  }
}

inline Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open instance file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("instance json: ") + e.what());
  }
  auto b = instance_bundle_from_json(j, path.parent_path());
  return make_instance(b.topology, b.phy, b.spec);
}

inline nlohmann::json to_json(const Instance& inst) {
  nlohmann::json j;
  j["topology"] = to_json(inst.topology);
  j["k"] = inst.routes.k();
  j["mode"] = mode_name(inst.mode);
  j["baud_gbaud"] = inst.baud_hz / 1e9;
  j["transceivers"] = inst.transceivers ? nlohmann::json(*inst.transceivers) : nlohmann::json("inf");
  j["band_wavelengths"] = {inst.band_budget(Band::U), inst.band_budget(Band::L), inst.band_budget(Band::C)};
  j["demand"] = demand_to_json(inst);
  return j;
}

}  // namespace mbcg
