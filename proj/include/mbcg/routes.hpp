#pragma once

#include <compare>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mbcg/topology.hpp"

namespace mbcg {

using RouteId = int;
using PairId = int;

struct NodePair {
  NodeId source{-1};
  NodeId destination{-1};
  auto operator<=>(const NodePair&) const = default;
};

/// K candidate routes for every ordered node pair, flattened into one table
/// with global route ids. Pair ids follow (source, destination) order.
class RouteSet {
 public:
  RouteSet() = default;

  RouteSet(const NetworkTopology& topo, int k) : k_(k) {
    for (NodeId s = 0; s < topo.node_count(); ++s) {
      for (NodeId d = 0; d < topo.node_count(); ++d) {
        if (s == d) continue;
        add_pair({s, d}, yen_k_shortest(topo, s, d, k));
      }
    }
  }

  /// Routes only for the listed pairs, in the given order.
  RouteSet(const NetworkTopology& topo, int k, const std::vector<NodePair>& pairs) : k_(k) {
    for (const auto& np : pairs) {
      if (find_pair(np)) throw TopologyError("duplicate node pair");
      add_pair(np, yen_k_shortest(topo, np.source, np.destination, k));
    }
  }

  int k() const { return k_; }
  std::size_t size() const { return routes_.size(); }
  std::size_t pair_count() const { return pairs_.size(); }
  const CandidateRoute& route(RouteId r) const { return routes_.at(r); }
  const std::vector<CandidateRoute>& routes() const { return routes_; }
  const NodePair& pair(PairId p) const { return pairs_.at(p); }
  const std::vector<NodePair>& pairs() const { return pairs_; }
  PairId pair_of(RouteId r) const { return route_pair_.at(r); }
  const std::vector<RouteId>& routes_of(PairId p) const { return pair_routes_.at(p); }

  std::optional<PairId> find_pair(NodePair np) const {
    auto it = pair_index_.find(np);
    if (it == pair_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Route ids of `(s, d)` with 1-based rank `k`.
  std::optional<RouteId> find_route(NodePair np, int k) const {
    auto p = find_pair(np);
    if (!p || k < 1 || k > static_cast<int>(pair_routes_[*p].size())) return std::nullopt;
    return pair_routes_[*p][k - 1];
  }

  void add_pair(NodePair np, std::vector<CandidateRoute> routes) {
    const auto p = static_cast<PairId>(pairs_.size());
    pairs_.push_back(np);
    pair_index_.emplace(np, p);
    pair_routes_.emplace_back();
    for (auto& r : routes) {
      const auto id = static_cast<RouteId>(routes_.size());
      pair_routes_.back().push_back(id);
      route_pair_.push_back(p);
      routes_.push_back(std::move(r));
    }
  }

 private:
  int k_{0};
  std::vector<CandidateRoute> routes_;
  std::vector<PairId> route_pair_;
  std::vector<NodePair> pairs_;
  std::vector<std::vector<RouteId>> pair_routes_;
  std::map<NodePair, PairId> pair_index_;
};

/// True when two routes share at least one link.
inline bool routes_conflict(const CandidateRoute& a, const CandidateRoute& b) {
  for (LinkId l : a.links) {
    if (route_uses_link(b, l)) return true;
  }
  return false;
}

}  // namespace mbcg
