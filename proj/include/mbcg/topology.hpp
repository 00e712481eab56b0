#pragma once

// Optical network graph, topology file ingestion and candidate routes.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mbcg {

using NodeId = int;
using LinkId = int;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected fiber link; `spans` is the number of amplified spans N_l.
struct Link {
  NodeId u{-1};
  NodeId v{-1};
  int spans{1};
};

/// Connected, simple, undirected network. Immutable once constructed.
class NetworkTopology {
 public:
  NetworkTopology() = default;

  /// Validates and builds. Throws TopologyError on self-loops, duplicate
  /// links, nonpositive span counts, unknown endpoints or a disconnected graph.
  NetworkTopology(std::string name, std::vector<std::string> nodes,
                  std::vector<Link> links)
      : name_(std::move(name)), nodes_(std::move(nodes)), links_(std::move(links)) {
    std::set<std::string> seen_names;
    for (const auto& n : nodes_) {
      if (!seen_names.insert(n).second) throw TopologyError("duplicate node '" + n + "'");
    }
    const auto n = static_cast<int>(nodes_.size());
    adjacency_.assign(nodes_.size(), {});
    for (LinkId id = 0; id < static_cast<LinkId>(links_.size()); ++id) {
      auto& l = links_[id];
      if (l.u < 0 || l.u >= n || l.v < 0 || l.v >= n) {
        throw TopologyError("link " + std::to_string(id) + " references an unknown node");
      }
      if (l.u == l.v) throw TopologyError("self-loop on node '" + nodes_[l.u] + "'");
      if (l.spans < 1) {
        throw TopologyError("nonpositive span count on link " + nodes_[l.u] + "-" + nodes_[l.v]);
      }
      if (l.u > l.v) std::swap(l.u, l.v);
      if (!pair_to_link_.emplace(std::pair{l.u, l.v}, id).second) {
        throw TopologyError("duplicate link " + nodes_[l.u] + "-" + nodes_[l.v]);
      }
      adjacency_[l.u].push_back({l.v, id});
      adjacency_[l.v].push_back({l.u, id});
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
    if (!connected()) throw TopologyError("topology '" + name_ + "' is not connected");
  }

  const std::string& name() const { return name_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  const std::vector<std::string>& node_names() const { return nodes_; }
  const std::string& node_name(NodeId v) const { return nodes_.at(v); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_.at(id); }

  /// Neighbours of `v` as (neighbour, link) sorted by neighbour id.
  const std::vector<std::pair<NodeId, LinkId>>& neighbours(NodeId v) const {
    return adjacency_.at(v);
  }

  std::optional<LinkId> link_between(NodeId a, NodeId b) const {
    if (a > b) std::swap(a, b);
    auto it = pair_to_link_.find({a, b});
    if (it == pair_to_link_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<NodeId> find_node(const std::string& name) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end()) return std::nullopt;
    return static_cast<NodeId>(it - nodes_.begin());
  }

  NodeId node(const std::string& name) const {
    if (auto id = find_node(name)) return *id;
    throw TopologyError("unknown node '" + name + "'");
  }

 private:
  bool connected() const {
    if (nodes_.empty()) return false;
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (auto [w, _] : adjacency_[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    return reached == nodes_.size();
  }

  std::string name_;
  std::vector<std::string> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<std::pair<NodeId, LinkId>>> adjacency_;
  std::map<std::pair<NodeId, NodeId>, LinkId> pair_to_link_;
};

// ---------------------------------------------------------------------------
// File ingestion

enum class TopologyFormat { edge_list_csv, json };

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline int parse_spans(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    throw TopologyError(where + ": span count '" + text + "' is not an integer");
  }
  if (used != text.size()) throw TopologyError(where + ": span count '" + text + "' is not an integer");
  if (value < 1) throw TopologyError(where + ": nonpositive span count " + text);
  return static_cast<int>(value);
}

inline NodeId intern(std::vector<std::string>& nodes, std::map<std::string, NodeId>& index,
                     const std::string& name) {
  auto [it, inserted] = index.emplace(name, static_cast<NodeId>(nodes.size()));
  if (inserted) nodes.push_back(name);
  return it->second;
}

}  // namespace detail

/// CSV with header `u,v,spans`; nodes are numbered in order of first appearance.
inline NetworkTopology parse_topology_csv(std::istream& in, std::string name = "topology") {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<std::string> nodes;
  std::map<std::string, NodeId> index;
  std::vector<Link> links;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(detail::trim(field));
    const std::string where = "line " + std::to_string(line_no);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"u", "v", "spans"}) {
        throw TopologyError(where + ": expected header 'u,v,spans'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw TopologyError(where + ": expected 'u,v,spans'");
    }
    if (fields[0] == fields[1]) throw TopologyError(where + ": self-loop on node '" + fields[0] + "'");
    int spans = detail::parse_spans(fields[2], where);
    NodeId u = detail::intern(nodes, index, fields[0]);
    NodeId v = detail::intern(nodes, index, fields[1]);
    links.push_back({u, v, spans});
  }
  if (!header_seen) throw TopologyError("empty topology file");
  return NetworkTopology(std::move(name), std::move(nodes), std::move(links));
}

/// JSON `{name, nodes:[...], links:[{u,v,spans}]}`.
inline NetworkTopology parse_topology_json(const nlohmann::json& doc) {
  try {
    std::vector<std::string> nodes = doc.at("nodes").get<std::vector<std::string>>();
    std::map<std::string, NodeId> index;
    for (NodeId i = 0; i < static_cast<NodeId>(nodes.size()); ++i) {
      if (!index.emplace(nodes[i], i).second) throw TopologyError("duplicate node '" + nodes[i] + "'");
    }
    std::vector<Link> links;
    for (const auto& l : doc.at("links")) {
      auto u = l.at("u").get<std::string>();
      auto v = l.at("v").get<std::string>();
      if (u == v) throw TopologyError("self-loop on node '" + u + "'");
      auto iu = index.find(u), iv = index.find(v);
      if (iu == index.end() || iv == index.end()) {
        throw TopologyError("link " + u + "-" + v + " references an unknown node");
      }
      const auto& spans_j = l.at("spans");
      if (!spans_j.is_number_integer()) throw TopologyError("link " + u + "-" + v + ": spans must be an integer");
      auto spans = spans_j.get<long>();
      if (spans < 1) throw TopologyError("link " + u + "-" + v + ": nonpositive span count");
      links.push_back({iu->second, iv->second, static_cast<int>(spans)});
    }
    return NetworkTopology(doc.value("name", std::string("topology")), std::move(nodes),
                           std::move(links));
  } catch (const nlohmann::json::exception& e) {
    throw TopologyError(std::string("topology json: ") + e.what());
  }
}

inline TopologyFormat guess_topology_format(const std::filesystem::path& path) {
  return path.extension() == ".json" ? TopologyFormat::json : TopologyFormat::edge_list_csv;
}

inline NetworkTopology load_topology(const std::filesystem::path& path, TopologyFormat format) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file " + path.string());
  if (format == TopologyFormat::json) {
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw TopologyError(path.string() + ": " + e.what());
    }
    return parse_topology_json(doc);
  }
  return parse_topology_csv(in, path.stem().string());
}

inline NetworkTopology load_topology(const std::filesystem::path& path) {
  return load_topology(path, guess_topology_format(path));
}

inline nlohmann::json to_json(const NetworkTopology& topo) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : topo.links()) {
    links.push_back({{"u", topo.node_name(l.u)}, {"v", topo.node_name(l.v)}, {"spans", l.spans}});
  }
  return {{"name", topo.name()}, {"nodes", topo.node_names()}, {"links", links}};
}

// ---------------------------------------------------------------------------
// Candidate routes

struct CandidateRoute {
  NodeId source{-1};
  NodeId destination{-1};
  int index{0};  // 1-based rank among the pair's routes
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
  int span_total{0};
};

inline bool route_uses_link(const CandidateRoute& route, LinkId link) {
  return std::find(route.links.begin(), route.links.end(), link) != route.links.end();
}

namespace detail {

struct RankedPath {
  int cost;
  std::vector<NodeId> nodes;
  bool operator<(const RankedPath& o) const {
    if (cost != o.cost) return cost < o.cost;
    return nodes < o.nodes;
  }
  bool operator==(const RankedPath& o) const { return cost == o.cost && nodes == o.nodes; }
};

// Shortest path from `from` to `to` avoiding banned nodes/links. Among
// equal-cost paths returns the lexicographically smallest node sequence:
// distances to `to` first, then a greedy walk to the smallest feasible
// successor.
inline std::optional<RankedPath> lexmin_shortest(const NetworkTopology& g, NodeId from, NodeId to,
                                                 const std::vector<char>& banned_node,
                                                 const std::vector<char>& banned_link) {
  constexpr int inf = std::numeric_limits<int>::max();
  std::vector<int> dist(g.node_count(), inf);
  using Item = std::pair<int, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[to] = 0;
  heap.push({0, to});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (auto [w, l] : g.neighbours(v)) {
      if (banned_link[l] || (banned_node[w] && w != from)) continue;
      int nd = d + g.link(l).spans;
      if (nd < dist[w]) {
        dist[w] = nd;
        heap.push({nd, w});
      }
    }
  }
  if (dist[from] == inf) return std::nullopt;
  RankedPath path{dist[from], {from}};
  NodeId v = from;
  while (v != to) {
    for (auto [w, l] : g.neighbours(v)) {  // sorted by w
      if (banned_link[l] || banned_node[w] || dist[w] == inf) continue;
      if (dist[v] == g.link(l).spans + dist[w]) {
        v = w;
        break;
      }
    }
    path.nodes.push_back(v);
  }
  return path;
}

}  // namespace detail

/// Yen's loopless k-shortest paths by total span count. Ties are ordered by
/// the lexicographic node-id sequence, so output is fully deterministic.
inline std::vector<CandidateRoute> yen_k_shortest(const NetworkTopology& g, NodeId s, NodeId d, int k) {
  if (s < 0 || s >= g.node_count() || d < 0 || d >= g.node_count()) {
    throw TopologyError("yen_k_shortest: unknown node");
  }
  if (s == d) throw TopologyError("yen_k_shortest: source equals destination");
  if (k < 1) throw TopologyError("yen_k_shortest: K must be >= 1");

  std::vector<char> banned_node(g.node_count(), 0);
  std::vector<char> banned_link(g.link_count(), 0);
  std::vector<detail::RankedPath> found;
  std::set<detail::RankedPath> candidates;

  if (auto first = detail::lexmin_shortest(g, s, d, banned_node, banned_link)) {
    found.push_back(std::move(*first));
  }
  while (!found.empty() && static_cast<int>(found.size()) < k) {
    const auto last = found.back();
    int root_cost = 0;
    for (std::size_t i = 0; i + 1 < last.nodes.size(); ++i) {
      NodeId spur = last.nodes[i];
      std::fill(banned_node.begin(), banned_node.end(), 0);
      std::fill(banned_link.begin(), banned_link.end(), 0);
      for (std::size_t j = 0; j < i; ++j) banned_node[last.nodes[j]] = 1;
      for (const auto& p : found) {
        if (p.nodes.size() > i + 1 && std::equal(last.nodes.begin(), last.nodes.begin() + i + 1, p.nodes.begin())) {
          banned_link[*g.link_between(p.nodes[i], p.nodes[i + 1])] = 1;
        }
      }
      if (auto spur_path = detail::lexmin_shortest(g, spur, d, banned_node, banned_link)) {
        detail::RankedPath total{root_cost + spur_path->cost,
                                 std::vector<NodeId>(last.nodes.begin(), last.nodes.begin() + i)};
        total.nodes.insert(total.nodes.end(), spur_path->nodes.begin(), spur_path->nodes.end());
        if (std::find(found.begin(), found.end(), total) == found.end()) candidates.insert(std::move(total));
      }
      root_cost += g.link(*g.link_between(last.nodes[i], last.nodes[i + 1])).spans;
    }
    if (candidates.empty()) break;
    found.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }

  std::vector<CandidateRoute> routes;
  for (const auto& p : found) {
    CandidateRoute r{s, d, static_cast<int>(routes.size()) + 1, p.nodes, {}, p.cost};
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) r.links.push_back(*g.link_between(p.nodes[i], p.nodes[i + 1]));
    routes.push_back(std::move(r));
  }
  return routes;
}

inline std::string route_label(const NetworkTopology& g, const CandidateRoute& r) {
  std::string out;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    if (i) out += '-';
    out += g.node_name(r.nodes[i]);
  }
  return out;
}

}  // namespace mbcg
