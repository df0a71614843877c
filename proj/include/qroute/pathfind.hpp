#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qroute/analytics.hpp"
#include "qroute/error.hpp"
#include "qroute/net_model.hpp"
#include "qroute/path.hpp"

namespace qroute {

enum class Metric {
  kHopCount,
  kSumNodeDistances,
  kInverseCreationRate,
  kBottleneckWidth,
  kExpectedThroughputSequential,
};

inline bool is_additive(Metric m) {
  return m == Metric::kHopCount || m == Metric::kSumNodeDistances || m == Metric::kInverseCreationRate;
}

inline std::string metric_name(Metric m) {
  switch (m) {
    case Metric::kHopCount: return "hop_count";
    case Metric::kSumNodeDistances: return "sum_node_distances";
    case Metric::kInverseCreationRate: return "inverse_creation_rate";
    case Metric::kBottleneckWidth: return "bottleneck_width";
    case Metric::kExpectedThroughputSequential: return "expected_throughput_sequential";
  }
  return "unknown";
}

inline Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::kHopCount, Metric::kSumNodeDistances, Metric::kInverseCreationRate,
                   Metric::kBottleneckWidth, Metric::kExpectedThroughputSequential}) {
    if (metric_name(m) == name) return m;
  }
  throw ValidationError("unknown metric '" + name + "'");
}

/// Realized entangled links per edge in the current slot, indexed like
/// NetworkGraph::edges().
struct LogicalTopology {
  std::vector<int> counts;

  void validate(const NetworkGraph& graph) const {
    if (counts.size() != graph.edge_count()) throw ValidationError("logical topology size differs from edge count");
    for (std::size_t e = 0; e < counts.size(); ++e) {
      if (counts[e] < 0 || counts[e] > graph.edge(static_cast<int>(e)).capacity()) {
        throw ValidationError("logical link count outside [0, capacity] on edge " +
                              detail::edge_label(graph.edge(static_cast<int>(e)).spec));
      }
    }
  }
};

/// Restricts searches to a residual view of the graph.
struct SearchConstraints {
  /// Usable capacity per edge; empty means the graph's own capacities.
  std::vector<int> capacities;
  /// Edges with less usable capacity than this are skipped.
  int min_width = 1;
};

/// Whole-path score; lower is better for every metric.
inline double path_cost(const PathSpec& path, Metric metric) {
  switch (metric) {
    case Metric::kHopCount: return static_cast<double>(path.hops());
    case Metric::kSumNodeDistances: {
      double total = 0.0;
      for (double l : path.per_hop_length_km) total += l;
      return total;
    }
    case Metric::kInverseCreationRate: {
      double total = 1.0;
      for (double p : path.per_hop_prob) total /= p;
      return total;
    }
    case Metric::kBottleneckWidth: return -static_cast<double>(path.width());
    case Metric::kExpectedThroughputSequential:
      return -expected_throughput(heralded_path_distribution(path, SwapOrderTree::sequential(path.hops())));
  }
  return 0.0;
}

/// Builds a PathSpec for a node-index route. Hop widths come from `capacities`
/// when given, otherwise from the graph.
inline PathSpec make_path(const NetworkGraph& graph, std::span<const int> route,
                          std::span<const int> capacities = {}) {
  if (route.size() < 2) throw ValidationError("route needs at least two nodes");
  PathSpec p;
  for (std::size_t i = 0; i < route.size(); ++i) {
    p.nodes.push_back(graph.node(route[i]).id);
    if (i > 0 && i + 1 < route.size()) p.interior_swap_probs.push_back(graph.node(route[i]).swap_prob);
    if (i + 1 < route.size()) {
      auto e = graph.edge_between(route[i], route[i + 1]);
      if (!e) throw ValidationError("route uses a missing edge " + graph.node(route[i]).id + "-" +
                                    graph.node(route[i + 1]).id);
      const auto& edge = graph.edge(*e);
      p.per_hop_capacity.push_back(capacities.empty() ? edge.capacity()
                                                      : capacities[static_cast<std::size_t>(*e)]);
      p.per_hop_prob.push_back(edge.link_prob);
      p.per_hop_length_km.push_back(edge.length_km());
    }
  }
  p.validate();
  return p;
}

/// Builds a PathSpec for a route given as node ids.
inline PathSpec make_path(const NetworkGraph& graph, const std::vector<std::string>& ids,
                          std::span<const int> capacities = {}) {
  std::vector<int> route;
  for (const auto& id : ids) route.push_back(graph.node_index(id));
  return make_path(graph, std::span<const int>(route), capacities);
}

/// Edge indices traversed by a path on the graph.
inline std::vector<int> path_edges(const NetworkGraph& graph, const PathSpec& path) {
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    auto e = graph.edge_between(graph.node_index(path.nodes[i]), graph.node_index(path.nodes[i + 1]));
    if (!e) throw ValidationError("path uses a missing edge " + path.nodes[i] + "-" + path.nodes[i + 1]);
    out.push_back(*e);
  }
  return out;
}

namespace detail {

struct Route {
  std::vector<int> nodes;
  double cost = 0.0;
};

/// (cost, node sequence) ordering used for every tie-break.
inline bool route_less(const Route& x, const Route& y) {
  if (x.cost != y.cost) return x.cost < y.cost;
  return x.nodes < y.nodes;
}

inline double hop_cost(const NetworkGraph::Edge& e, Metric metric) {
  switch (metric) {
    case Metric::kHopCount: return 1.0;
    case Metric::kSumNodeDistances: return e.length_km();
    case Metric::kInverseCreationRate:
      return e.link_prob > 0.0 ? -std::log(e.link_prob) : std::numeric_limits<double>::infinity();
    default: break;
  }
  throw ValidationError("metric " + metric_name(metric) + " is not additive");
}

class SearchGraph {
 public:
  SearchGraph(const NetworkGraph& graph, const SearchConstraints& constraints)
      : graph_(graph), constraints_(constraints) {
    if (!constraints_.capacities.empty() && constraints_.capacities.size() != graph.edge_count()) {
      throw ValidationError("residual capacity vector size differs from edge count");
    }
    banned_edges_.assign(graph.edge_count(), false);
    banned_nodes_.assign(graph.node_count(), false);
  }

  int capacity(int e) const {
    return constraints_.capacities.empty() ? graph_.edge(e).capacity()
                                           : constraints_.capacities[static_cast<std::size_t>(e)];
  }

  bool usable(int e) const {
    return !banned_edges_[static_cast<std::size_t>(e)] && capacity(e) >= std::max(1, constraints_.min_width);
  }

  void ban_edge(int e) { banned_edges_[static_cast<std::size_t>(e)] = true; }
  void ban_node(int v) { banned_nodes_[static_cast<std::size_t>(v)] = true; }
  bool banned(int v) const { return banned_nodes_[static_cast<std::size_t>(v)]; }
  void reset_bans() {
    std::fill(banned_edges_.begin(), banned_edges_.end(), false);
    std::fill(banned_nodes_.begin(), banned_nodes_.end(), false);
  }

  const NetworkGraph& graph() const { return graph_; }

  double route_cost(const std::vector<int>& nodes, Metric metric) const {
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      c += hop_cost(graph_.edge(*graph_.edge_between(nodes[i], nodes[i + 1])), metric);
    }
    return c;
  }

  /// Label-setting search; among equal costs the lexicographically smallest
  /// node-index sequence wins.
  std::optional<Route> dijkstra(int s, int d, Metric metric) const {
    auto worse = [](const Route& x, const Route& y) { return route_less(y, x); };
    std::priority_queue<Route, std::vector<Route>, decltype(worse)> open(worse);
    std::vector<char> settled(graph_.node_count(), 0);
    if (banned(s)) return std::nullopt;
    open.push(Route{{s}, 0.0});
    while (!open.empty()) {
      Route cur = open.top();
      open.pop();
      const int u = cur.nodes.back();
      if (settled[static_cast<std::size_t>(u)]) continue;
      settled[static_cast<std::size_t>(u)] = 1;
      if (u == d) return cur;
      for (const auto& adj : graph_.neighbors(u)) {
        if (settled[static_cast<std::size_t>(adj.node)] || banned(adj.node) || !usable(adj.edge)) continue;
        Route next = cur;
        next.nodes.push_back(adj.node);
        next.cost += hop_cost(graph_.edge(adj.edge), metric);
        open.push(std::move(next));
      }
    }
    return std::nullopt;
  }

  bool connected(int s, int d) const {
    std::vector<char> seen(graph_.node_count(), 0);
    std::vector<int> stack{s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (u == d) return true;
      for (const auto& adj : graph_.neighbors(u)) {
        if (!seen[static_cast<std::size_t>(adj.node)] && usable(adj.edge) && !banned(adj.node)) {
          seen[static_cast<std::size_t>(adj.node)] = 1;
          stack.push_back(adj.node);
        }
      }
    }
    return false;
  }

 private:
  const NetworkGraph& graph_;
  SearchConstraints constraints_;
  std::vector<char> banned_edges_;
  std::vector<char> banned_nodes_;
};

inline std::pair<int, int> endpoints(const NetworkGraph& graph, const std::string& s, const std::string& d) {
  const int si = graph.node_index(s);
  const int di = graph.node_index(d);
  if (si == di) throw ValidationError("source and destination must differ");
  return {si, di};
}

inline void require_additive(Metric metric) {
  if (!is_additive(metric)) throw ValidationError("metric " + metric_name(metric) + " is not additive");
}

inline PathSpec to_path(const SearchGraph& sg, const std::vector<int>& nodes) {
  std::vector<int> caps;
  caps.reserve(sg.graph().edge_count());
  for (std::size_t e = 0; e < sg.graph().edge_count(); ++e) caps.push_back(sg.capacity(static_cast<int>(e)));
  return make_path(sg.graph(), std::span<const int>(nodes), caps);
}

}  // namespace detail

/// Minimum-cost loop-free path under an additive metric. Hop widths reflect
/// the usable capacity of each edge.
inline std::optional<PathSpec> shortest_path(const NetworkGraph& graph, const std::string& s, const std::string& d,
                                             Metric metric, const SearchConstraints& constraints = {}) {
  detail::require_additive(metric);
  const auto [si, di] = detail::endpoints(graph, s, d);
  detail::SearchGraph sg(graph, constraints);
  auto route = sg.dijkstra(si, di, metric);
  if (!route) return std::nullopt;
  return detail::to_path(sg, route->nodes);
}

/// Yen's algorithm: up to k loop-free paths in non-decreasing cost.
inline std::vector<PathSpec> k_shortest_paths(const NetworkGraph& graph, const std::string& s, const std::string& d,
                                              int k, Metric metric, const SearchConstraints& constraints = {}) {
  detail::require_additive(metric);
  if (k < 1) throw ValidationError("k must be at least 1");
  const auto [si, di] = detail::endpoints(graph, s, d);
  detail::SearchGraph sg(graph, constraints);

  std::vector<detail::Route> accepted;
  auto first = sg.dijkstra(si, di, metric);
  if (!first) return {};
  first->cost = sg.route_cost(first->nodes, metric);
  accepted.push_back(*first);

  auto less = [](const detail::Route& x, const detail::Route& y) { return detail::route_less(x, y); };
  std::set<detail::Route, decltype(less)> candidates(less);
  std::set<std::vector<int>> known{first->nodes};

  while (static_cast<int>(accepted.size()) < k) {
    const auto prev = accepted.back().nodes;
    for (std::size_t i = 0; i + 1 < prev.size(); ++i) {
      sg.reset_bans();
      const std::vector<int> root(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      for (const auto& a : accepted) {
        if (a.nodes.size() > i + 1 && std::equal(root.begin(), root.end(), a.nodes.begin())) {
          sg.ban_edge(*graph.edge_between(a.nodes[i], a.nodes[i + 1]));
        }
      }
      for (std::size_t r = 0; r < i; ++r) sg.ban_node(root[r]);
      auto spur = sg.dijkstra(root.back(), di, metric);
      if (!spur) continue;
      detail::Route total;
      total.nodes = root;
      total.nodes.insert(total.nodes.end(), spur->nodes.begin() + 1, spur->nodes.end());
      if (!known.insert(total.nodes).second) continue;
      total.cost = sg.route_cost(total.nodes, metric);
      candidates.insert(std::move(total));
    }
    if (candidates.empty()) break;
    accepted.push_back(*candidates.begin());
    candidates.erase(candidates.begin());
  }

  std::vector<PathSpec> out;
  out.reserve(accepted.size());
  for (const auto& r : accepted) out.push_back(detail::to_path(sg, r.nodes));
  return out;
}

/// Path with the largest bottleneck capacity; ties go to the highest creation
/// rate (smallest product of 1/p), then to the lexicographically smallest route.
inline std::optional<PathSpec> widest_path(const NetworkGraph& graph, const std::string& s, const std::string& d,
                                           const SearchConstraints& constraints = {}) {
  const auto [si, di] = detail::endpoints(graph, s, d);
  detail::SearchGraph probe(graph, constraints);
  std::set<int, std::greater<>> widths;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const int c = probe.capacity(static_cast<int>(e));
    if (c >= std::max(1, constraints.min_width)) widths.insert(c);
  }
  for (int w : widths) {
    SearchConstraints at_width = constraints;
    at_width.min_width = w;
    detail::SearchGraph sg(graph, at_width);
    if (!sg.connected(si, di)) continue;
    auto route = sg.dijkstra(si, di, Metric::kInverseCreationRate);
    if (route) return detail::to_path(sg, route->nodes);
  }
  return std::nullopt;
}

struct DisjointOptions {
  bool node_disjoint = false;
  /// Paths longer than this are not taken; their links stay available.
  std::optional<int> max_hops;
};

/// Greedy multi-path search on the logical topology: repeatedly take a
/// hop-count shortest path over edges with at least one realized link, then
/// remove one link from every edge it used.
inline std::vector<PathSpec> disjoint_paths_on_logical(const LogicalTopology& logical, const NetworkGraph& graph,
                                                       const std::string& s, const std::string& d, int max_paths,
                                                       const DisjointOptions& options = {}) {
  logical.validate(graph);
  const auto [si, di] = detail::endpoints(graph, s, d);
  SearchConstraints remaining{logical.counts, 1};
  std::vector<int> banned_nodes;
  std::vector<PathSpec> out;
  while (static_cast<int>(out.size()) < max_paths) {
    detail::SearchGraph sg(graph, remaining);
    for (int v : banned_nodes) sg.ban_node(v);
    auto route = sg.dijkstra(si, di, Metric::kHopCount);
    if (!route) break;
    const int hops = static_cast<int>(route->nodes.size()) - 1;
    if (options.max_hops && hops > *options.max_hops) break;
    std::vector<int> unit(graph.edge_count(), 1);
    out.push_back(make_path(graph, std::span<const int>(route->nodes), unit));
    for (std::size_t i = 0; i + 1 < route->nodes.size(); ++i) {
      --remaining.capacities[static_cast<std::size_t>(*graph.edge_between(route->nodes[i], route->nodes[i + 1]))];
    }
    if (options.node_disjoint) {
      for (std::size_t i = 1; i + 1 < route->nodes.size(); ++i) banned_nodes.push_back(route->nodes[i]);
    }
  }
  return out;
}

}  // namespace qroute
