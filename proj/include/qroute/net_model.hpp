#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qroute/error.hpp"

namespace qroute {

/// Propagation speed of light in fibre, km/s.
inline constexpr double kFiberSpeedKmPerSecond = 2.0e5;

/// Upper bound on Bell-state measurement success with linear optics.
inline constexpr double kLinearOpticsSwapBound = 0.5;
/// Highest demonstrated BSM success using ancillary photons.
inline constexpr double kAdvancedSwapBound = 0.579;

/// How strictly node swap probabilities are checked against platform bounds.
enum class SwapProbCheck {
  kWarn,          ///< record a warning, accept the value
  kLinearOptics,  ///< reject q > 0.5
  kAdvanced,      ///< reject q > 0.579
};

struct NodeParams {
  std::string id;
  double swap_prob = 0.5;
  int memory_cutoff_slots = 1;

  friend bool operator==(const NodeParams&, const NodeParams&) = default;
};

struct EdgeParams {
  std::string u;
  std::string v;
  int capacity = 1;
  double length_km = 0.0;
  /// Overrides the value derived from length and physical constants.
  std::optional<double> link_prob;

  friend bool operator==(const EdgeParams&, const EdgeParams&) = default;
};

struct PhysicalConstants {
  double attenuation_alpha = 0.046;  // per km, about 0.2 dB/km
  int attempts_per_slot = 1;
  double base_efficiency = 1.0;
  SwapProbCheck swap_check = SwapProbCheck::kWarn;

  friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;
};

/// Per-slot probability that at least one of `attempts` tries on a single
/// channel heralds an elementary entanglement: 1 - (1 - eta*exp(-alpha*L))^A.
inline double link_success_probability(double length_km, double alpha, double eta, int attempts) {
  if (!(length_km >= 0.0)) throw ValidationError("link length must be non-negative");
  if (!(alpha >= 0.0)) throw ValidationError("attenuation coefficient must be non-negative");
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("efficiency must lie in (0, 1]");
  if (attempts < 1) throw ValidationError("attempts per slot must be at least 1");
  const double single = eta * std::exp(-alpha * length_km);
  if (single >= 1.0) return 1.0;
  // 1 - (1-x)^A evaluated without cancellation for tiny x.
  const double p = -std::expm1(static_cast<double>(attempts) * std::log1p(-single));
  return std::clamp(p, 0.0, 1.0);
}

/// One-way classical signalling time over a fibre of the given length.
inline double classical_delay_ms(double length_km) {
  return length_km / kFiberSpeedKmPerSecond * 1000.0;
}

/// Validated, immutable physical topology. Nodes are indexed in ascending id
/// order so that index comparisons agree with lexicographic id comparisons.
class NetworkGraph {
 public:
  struct Edge {
    EdgeParams spec;
    int a = 0;  // lower node index
    int b = 0;  // higher node index
    double link_prob = 0.0;

    int capacity() const { return spec.capacity; }
    double length_km() const { return spec.length_km; }
    int other(int node) const { return node == a ? b : a; }
  };

  struct Adjacent {
    int node;
    int edge;
  };

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const NodeParams& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  const Edge& edge(int index) const { return edges_.at(static_cast<std::size_t>(index)); }
  const std::vector<NodeParams>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const PhysicalConstants& physical() const { return phys_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::optional<int> find_node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  int node_index(const std::string& id) const {
    auto found = find_node(id);
    if (!found) throw ValidationError("unknown node '" + id + "'");
    return *found;
  }

  std::optional<int> edge_between(int x, int y) const {
    for (const auto& adj : adjacency_.at(static_cast<std::size_t>(x))) {
      if (adj.node == y) return adj.edge;
    }
    return std::nullopt;
  }

  /// Neighbours of a node in ascending node-index order.
  const std::vector<Adjacent>& neighbors(int index) const {
    return adjacency_.at(static_cast<std::size_t>(index));
  }

  /// Connected components as sorted lists of node ids, ordered by first id.
  std::vector<std::vector<std::string>> components() const {
    std::vector<int> label(nodes_.size(), -1);
    std::vector<std::vector<std::string>> out;
    for (std::size_t start = 0; start < nodes_.size(); ++start) {
      if (label[start] >= 0) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      std::vector<int> stack{static_cast<int>(start)};
      label[start] = id;
      while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        out.back().push_back(nodes_[static_cast<std::size_t>(cur)].id);
        for (const auto& adj : adjacency_[static_cast<std::size_t>(cur)]) {
          if (label[static_cast<std::size_t>(adj.node)] < 0) {
            label[static_cast<std::size_t>(adj.node)] = id;
            stack.push_back(adj.node);
          }
        }
      }
      std::sort(out.back().begin(), out.back().end());
    }
    return out;
  }

  bool is_connected() const { return components().size() <= 1; }

  std::vector<NodeParams> node_specs() const { return nodes_; }

  std::vector<EdgeParams> edge_specs() const {
    std::vector<EdgeParams> out;
    out.reserve(edges_.size());
    for (const auto& e : edges_) out.push_back(e.spec);
    return out;
  }

  /// FNV-1a digest over the canonical content of the graph.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&h](const void* data, std::size_t n) {
      const auto* p = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
      }
    };
    auto mix_str = [&](const std::string& s) {
      const std::uint64_t n = s.size();
      mix_bytes(&n, sizeof n);
      mix_bytes(s.data(), s.size());
    };
    auto mix_num = [&](auto x) { mix_bytes(&x, sizeof x); };
    for (const auto& n : nodes_) {
      mix_str(n.id);
      mix_num(std::bit_cast<std::uint64_t>(n.swap_prob));
      mix_num(n.memory_cutoff_slots);
    }
    for (const auto& e : edges_) {
      mix_num(e.a);
      mix_num(e.b);
      mix_num(e.spec.capacity);
      mix_num(std::bit_cast<std::uint64_t>(e.spec.length_km));
      mix_num(std::bit_cast<std::uint64_t>(e.link_prob));
    }
    mix_num(std::bit_cast<std::uint64_t>(phys_.attenuation_alpha));
    mix_num(phys_.attempts_per_slot);
    mix_num(std::bit_cast<std::uint64_t>(phys_.base_efficiency));
    return h;
  }

  friend bool operator==(const NetworkGraph& x, const NetworkGraph& y) {
    if (x.nodes_ != y.nodes_ || !(x.phys_ == y.phys_) || x.edges_.size() != y.edges_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.edges_.size(); ++i) {
      const auto& l = x.edges_[i];
      const auto& r = y.edges_[i];
      if (!(l.spec == r.spec) || l.a != r.a || l.b != r.b || l.link_prob != r.link_prob) return false;
    }
    return true;
  }

 private:
  friend NetworkGraph build_graph(std::vector<NodeParams>, std::vector<EdgeParams>,
                                  const PhysicalConstants&);

  std::vector<NodeParams> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::map<std::string, int> index_;
  PhysicalConstants phys_;
  std::vector<std::string> warnings_;
};

namespace detail {

inline bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

inline std::string edge_label(const EdgeParams& e) { return e.u + "-" + e.v; }

}  // namespace detail

inline NetworkGraph build_graph(std::vector<NodeParams> node_specs, std::vector<EdgeParams> edge_specs,
                                const PhysicalConstants& phys) {
  if (!(phys.attenuation_alpha >= 0.0)) throw ValidationError("attenuation coefficient must be non-negative");
  if (phys.attempts_per_slot < 1) throw ValidationError("attempts per slot must be at least 1");
  if (!(phys.base_efficiency > 0.0 && phys.base_efficiency <= 1.0)) {
    throw ValidationError("base efficiency must lie in (0, 1]");
  }

  NetworkGraph g;
  g.phys_ = phys;

  for (const auto& n : node_specs) {
    if (n.id.empty()) throw ValidationError("node id must not be empty");
    if (!detail::in_unit_interval(n.swap_prob)) {
      throw ValidationError("node '" + n.id + "': swap probability outside [0, 1]");
    }
    if (n.memory_cutoff_slots < 1) {
      throw ValidationError("node '" + n.id + "': memory cutoff must be at least 1 slot");
    }
    const bool over_linear = n.swap_prob > kLinearOpticsSwapBound;
    const bool over_advanced = n.swap_prob > kAdvancedSwapBound;
    switch (phys.swap_check) {
      case SwapProbCheck::kLinearOptics:
        if (over_linear) throw ValidationError("node '" + n.id + "': swap probability exceeds linear-optics bound 0.5");
        break;
      case SwapProbCheck::kAdvanced:
        if (over_advanced) throw ValidationError("node '" + n.id + "': swap probability exceeds 0.579");
        break;
      case SwapProbCheck::kWarn:
        if (over_advanced) {
          g.warnings_.push_back("node '" + n.id + "': swap probability above demonstrated BSM bound 0.579");
        } else if (over_linear) {
          g.warnings_.push_back("node '" + n.id + "': swap probability above linear-optics bound 0.5");
        }
        break;
    }
  }

  std::sort(node_specs.begin(), node_specs.end(),
            [](const NodeParams& x, const NodeParams& y) { return x.id < y.id; });
  for (std::size_t i = 0; i < node_specs.size(); ++i) {
    if (i > 0 && node_specs[i].id == node_specs[i - 1].id) {
      throw ValidationError("duplicate node id '" + node_specs[i].id + "'");
    }
    g.index_.emplace(node_specs[i].id, static_cast<int>(i));
  }
  g.nodes_ = std::move(node_specs);

  for (const auto& e : edge_specs) {
    const std::string label = detail::edge_label(e);
    auto iu = g.index_.find(e.u);
    auto iv = g.index_.find(e.v);
    if (iu == g.index_.end()) throw ValidationError("edge " + label + ": dangling endpoint '" + e.u + "'");
    if (iv == g.index_.end()) throw ValidationError("edge " + label + ": dangling endpoint '" + e.v + "'");
    if (iu->second == iv->second) throw ValidationError("edge " + label + ": self-loop");
    if (e.capacity < 0) throw ValidationError("edge " + label + ": negative capacity");
    if (!(e.length_km >= 0.0)) throw ValidationError("edge " + label + ": negative length");
    NetworkGraph::Edge edge;
    edge.spec = e;
    edge.a = std::min(iu->second, iv->second);
    edge.b = std::max(iu->second, iv->second);
    if (e.link_prob) {
      if (!detail::in_unit_interval(*e.link_prob)) {
        throw ValidationError("edge " + label + ": link probability outside [0, 1]");
      }
      edge.link_prob = *e.link_prob;
    } else {
      edge.link_prob = link_success_probability(e.length_km, phys.attenuation_alpha, phys.base_efficiency,
                                                phys.attempts_per_slot);
    }
    g.edges_.push_back(std::move(edge));
  }

  std::sort(g.edges_.begin(), g.edges_.end(), [](const auto& x, const auto& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  for (std::size_t i = 1; i < g.edges_.size(); ++i) {
    if (g.edges_[i].a == g.edges_[i - 1].a && g.edges_[i].b == g.edges_[i - 1].b) {
      throw ValidationError("edge " + detail::edge_label(g.edges_[i].spec) +
                            ": parallel edge; express parallel channels through capacity");
    }
  }

  g.adjacency_.assign(g.nodes_.size(), {});
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    const auto& e = g.edges_[i];
    g.adjacency_[static_cast<std::size_t>(e.a)].push_back({e.b, static_cast<int>(i)});
    g.adjacency_[static_cast<std::size_t>(e.b)].push_back({e.a, static_cast<int>(i)});
  }
  for (auto& adj : g.adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const auto& x, const auto& y) { return x.node < y.node; });
  }
  return g;
}

/// Id of the grid node at (row, col), e.g. "2,3".
inline std::string grid_node_id(int row, int col) {
  return std::to_string(row) + "," + std::to_string(col);
}

/// rows x cols lattice with horizontal and vertical neighbour edges; every node
/// and edge clones the given templates (template ids/endpoints are ignored).
inline NetworkGraph grid_topology(int rows, int cols, const EdgeParams& edge_template,
                                  const NodeParams& node_template, const PhysicalConstants& phys = {}) {
  if (rows < 1 || cols < 1) throw ValidationError("grid dimensions must be positive");
  std::vector<NodeParams> nodes;
  std::vector<EdgeParams> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      NodeParams n = node_template;
      n.id = grid_node_id(r, c);
      nodes.push_back(std::move(n));
      if (c + 1 < cols) {
        EdgeParams e = edge_template;
        e.u = grid_node_id(r, c);
        e.v = grid_node_id(r, c + 1);
        edges.push_back(std::move(e));
      }
      if (r + 1 < rows) {
        EdgeParams e = edge_template;
        e.u = grid_node_id(r, c);
        e.v = grid_node_id(r + 1, c);
        edges.push_back(std::move(e));
      }
    }
  }
  return build_graph(std::move(nodes), std::move(edges), phys);
}

}  // namespace qroute
