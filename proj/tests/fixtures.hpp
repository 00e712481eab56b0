#pragma once

// Instance generators and brute-force oracles shared by the model, CG and
// acceptance tests.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mbcg/bench.hpp"
#include "mbcg/models.hpp"

namespace fixture {

using namespace mbcg;

/// Random spanning tree plus each remaining edge with probability 0.4; spans 1..40.
inline NetworkTopology random_topology(std::mt19937_64& rng, int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
  std::vector<Link> links;
  std::set<std::pair<int, int>> have;
  auto span = [&] { return 1 + static_cast<int>(draw_below(rng, 40)); };
  for (int v = 1; v < n; ++v) {
    const int u = static_cast<int>(draw_below(rng, v));
    links.push_back({u, v, span()});
    have.insert({u, v});
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (!have.count({u, v}) && draw_below(rng, 10) < 4) links.push_back({u, v, span()});
    }
  }
  return NetworkTopology("random", names, links);
}

struct DeskDraw {
  NetworkTopology topology;
  InstanceSpec spec;
};

/// Desk-scale draw: 3-5 nodes, K 1-3, W 1-8, random mode and format prefix,
/// 2-10 demand pairs with optional integer weights, A unlimited.
inline DeskDraw desk_draw(std::mt19937_64& rng) {
  const int n = 3 + static_cast<int>(draw_below(rng, 3));
  auto topo = random_topology(rng, n);
  InstanceSpec s;
  s.k = 1 + static_cast<int>(draw_below(rng, 3));
  s.mode = draw_below(rng, 2) ? Mode::rwa : Mode::rwba;
  s.wavelengths = 1 + static_cast<int>(draw_below(rng, 8));
  s.formats_allowed = 1 + draw_below(rng, 8);
  auto all = all_ordered_pairs(topo);
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t m = 2 + draw_below(rng, std::min<std::size_t>(9, all.size() - 1));
  all.resize(m);
  std::sort(all.begin(), all.end(), [](const NodePair& a, const NodePair& b) {
    return std::pair(a.source, a.destination) < std::pair(b.source, b.destination);
  });
  s.pairs = all;
  if (draw_below(rng, 2)) {
    for (std::size_t i = 0; i < m; ++i) s.weights.push_back(1 + static_cast<double>(draw_below(rng, 4)));
  }
  return {std::move(topo), std::move(s)};
}

inline Instance desk_instance(std::mt19937_64& rng, const PhysicalEnvironment& env = {}) {
  auto d = desk_draw(rng);
  return make_instance(d.topology, env, d.spec);
}

/// Best throughput (bit/s) over every delta assignment. Exponential in
/// routes x W; callers keep that product below ~20.
inline double ilp_brute_force(const Instance& inst) {
  const int R = static_cast<int>(inst.routes.size());
  const int W = inst.wavelengths;
  const int bits = R * W;
  double best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
    if (inst.transceivers && std::popcount(mask) > *inst.transceivers) continue;
    std::set<std::pair<LinkId, int>> used;
    std::vector<double> cap(inst.routes.pair_count(), 0.0);
    bool ok = true;
    for (int b = 0; b < bits && ok; ++b) {
      if (!(mask >> b & 1)) continue;
      const RouteId r = b / W;
      const int w = b % W;
      for (LinkId l : inst.routes.route(r).links) ok = ok && used.emplace(l, w).second;
      cap[inst.routes.pair_of(r)] += inst.capacity_of(r, inst.band_of(w));
    }
    if (ok) best = std::max(best, throughput_of(inst, cap));
  }
  return best;
}

/// Every clash-free configuration, band-tagged per nonempty band in RWBA mode.
inline std::vector<WavelengthConfiguration> all_configurations(const Instance& inst) {
  const int R = static_cast<int>(inst.routes.size());
  std::vector<WavelengthConfiguration> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << R); ++mask) {
    std::vector<RouteId> routes;
    for (int r = 0; r < R; ++r) {
      if (mask >> r & 1) routes.push_back(r);
    }
    if (find_clash(inst, routes)) continue;
    if (inst.mode == Mode::rwa) {
      out.push_back(make_configuration(inst, routes, std::nullopt));
    } else {
      for (Band b : kBands) {
        if (inst.band_budget(b) > 0) out.push_back(make_configuration(inst, routes, b));
      }
    }
  }
  return out;
}

}  // namespace fixture
