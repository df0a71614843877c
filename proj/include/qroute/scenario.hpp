#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qroute/error.hpp"
#include "qroute/montecarlo.hpp"
#include "qroute/net_model.hpp"
#include "qroute/pathfind.hpp"
#include "qroute/policy.hpp"
#include "qroute/routing.hpp"

namespace qroute {

inline constexpr int kScenarioVersion = 1;

/// A path to evaluate under one or more swap policies.
struct AnalysisTarget {
  std::string name;
  std::vector<std::string> nodes;
  /// Per-hop widths; defaults to the edge capacities.
  std::optional<std::vector<int>> widths;
  std::vector<SwapPolicy> policies;
  bool order_search = false;

  friend bool operator==(const AnalysisTarget&, const AnalysisTarget&) = default;
};

struct RoutingSection {
  int k = 4;
  Metric metric = Metric::kInverseCreationRate;
  SwapPolicy policy = SwapPolicy::doubling();
  UtilitySpec utility;

  friend bool operator==(const RoutingSection&, const RoutingSection&) = default;
};

struct SimulationSection {
  RoutingScheme scheme = RoutingScheme::kProactive;
  Forwarding forwarding = Forwarding::kSync;
  std::optional<SwapPolicy> policy;
  std::int64_t slots = 1000;
  std::uint64_t seed = 1;
  bool node_disjoint = false;
  int max_paths = 4;

  friend bool operator==(const SimulationSection&, const SimulationSection&) = default;
};

enum class OutputFormat { kJson, kCsv };

/// Everything one run needs: topology, demands, and per-command settings.
struct Scenario {
  int version = kScenarioVersion;
  PhysicalConstants physical;
  double elementary_fidelity = 1.0;
  std::vector<NodeParams> nodes;
  std::vector<EdgeParams> edges;
  std::vector<Request> requests;
  std::vector<AnalysisTarget> analysis;
  RoutingSection routing;
  SimulationSection simulation;
  OutputFormat format = OutputFormat::kJson;

  NetworkGraph graph() const { return build_graph(nodes, edges, physical); }

  RoutingConfig routing_config() const {
    return RoutingConfig{routing.k, routing.utility, routing.policy, elementary_fidelity, routing.metric};
  }

  SimConfig sim_config() const {
    SimConfig c;
    c.scheme = simulation.scheme;
    c.forwarding = simulation.forwarding;
    c.policy = simulation.policy;
    c.slots = simulation.slots;
    c.seed = simulation.seed;
    c.node_disjoint = simulation.node_disjoint;
    c.reactive_max_paths = simulation.max_paths;
    c.f0 = elementary_fidelity;
    return c;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

using nlohmann::json;

inline std::string swap_check_name(SwapProbCheck c) {
  switch (c) {
    case SwapProbCheck::kWarn: return "warn";
    case SwapProbCheck::kLinearOptics: return "linear_optics";
    case SwapProbCheck::kAdvanced: return "advanced";
  }
  return "warn";
}

inline SwapProbCheck parse_swap_check(const std::string& s, const std::string& where) {
  if (s == "warn") return SwapProbCheck::kWarn;
  if (s == "linear_optics") return SwapProbCheck::kLinearOptics;
  if (s == "advanced") return SwapProbCheck::kAdvanced;
  throw ValidationError(where + ": unknown swap probability check '" + s + "'");
}

/// Typed field access with the JSON path in every error message.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ValidationError(where_ + ": expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!allowed.count(it.key())) throw ValidationError(where_ + ": unknown field '" + it.key() + "'");
    }
  }

  bool has(const char* key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  std::string path(const char* key) const { return where_ + "." + key; }
  const json& raw(const char* key) const { return obj_.at(key); }

  std::string str(const char* key) const {
    require(key);
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ValidationError(path(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string str(const char* key, const std::string& fallback) const { return has(key) ? str(key) : fallback; }

  double num(const char* key) const {
    require(key);
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ValidationError(path(key) + ": expected a number");
    return v.get<double>();
  }
  double num(const char* key, double fallback) const { return has(key) ? num(key) : fallback; }

  std::int64_t integer(const char* key) const {
    require(key);
    const auto& v = obj_.at(key);
    if (!v.is_number_integer()) throw ValidationError(path(key) + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const char* key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) throw ValidationError(path(key) + ": expected true or false");
    return v.get<bool>();
  }

  const json& array(const char* key) const {
    const auto& v = obj_.at(key);
    if (!v.is_array()) throw ValidationError(path(key) + ": expected an array");
    return v;
  }

 private:
  void require(const char* key) const {
    if (!has(key)) throw ValidationError(where_ + ": missing field '" + key + "'");
  }

  const json& obj_;
  std::string where_;
};

inline int to_int(std::int64_t v, const std::string& where) {
  if (v < INT_MIN || v > INT_MAX) throw ValidationError(where + ": integer out of range");
  return static_cast<int>(v);
}

inline SwapOrderTree tree_from_json(const json& j, int& next_leaf, const std::string& where) {
  if (j.is_number_integer()) {
    const int hop = j.get<int>();
    if (hop != next_leaf) throw ValidationError(where + ": tree leaves must list hops in order");
    ++next_leaf;
    return SwapOrderTree::leaf(hop);
  }
  if (!j.is_array() || j.size() != 2) throw ValidationError(where + ": tree nodes are [left, right] pairs");
  auto l = tree_from_json(j[0], next_leaf, where);
  auto r = tree_from_json(j[1], next_leaf, where);
  return SwapOrderTree::join(l, r);
}

inline json tree_to_json(const SwapOrderTree& t, int index) {
  const auto& n = t.node(index);
  if (n.is_leaf()) return n.first_hop;
  return json::array({tree_to_json(t, n.left), tree_to_json(t, n.right)});
}

inline SwapPolicy policy_from_json(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return SwapPolicy::parse(j.get<std::string>());
    if (j.is_object() && j.contains("tree") && j.size() == 1) {
      int next = 0;
      return SwapPolicy::explicit_tree(tree_from_json(j.at("tree"), next, where));
    }
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ValidationError(where + ": expected a policy name or {\"tree\": [...]}");
}

inline json policy_to_json(const SwapPolicy& p) {
  if (p.kind == PolicyKind::kExplicitTree && p.tree) {
    return json{{"tree", tree_to_json(*p.tree, static_cast<int>(p.tree->nodes().size()) - 1)}};
  }
  return p.name();
}

inline json edge_to_json(const EdgeParams& e, bool with_endpoints) {
  json j{{"capacity", e.capacity}, {"length_km", e.length_km}};
  if (with_endpoints) {
    j["u"] = e.u;
    j["v"] = e.v;
  }
  if (e.link_prob) j["link_prob"] = *e.link_prob;
  return j;
}

inline EdgeParams edge_from_json(const json& j, const std::string& where, bool with_endpoints) {
  Fields f(j, where);
  if (with_endpoints) {
    f.allow_only({"u", "v", "capacity", "length_km", "link_prob"});
  } else {
    f.allow_only({"capacity", "length_km", "link_prob"});
  }
  EdgeParams e;
  if (with_endpoints) {
    e.u = f.str("u");
    e.v = f.str("v");
  }
  e.capacity = to_int(f.integer("capacity", 1), f.path("capacity"));
  e.length_km = f.num("length_km", 0.0);
  if (f.has("link_prob")) e.link_prob = f.num("link_prob");
  return e;
}

inline NodeParams node_from_json(const json& j, const std::string& where, bool with_id) {
  Fields f(j, where);
  if (with_id) {
    f.allow_only({"id", "swap_prob", "memory_cutoff_slots"});
  } else {
    f.allow_only({"swap_prob", "memory_cutoff_slots"});
  }
  NodeParams n;
  if (with_id) n.id = f.str("id");
  n.swap_prob = f.num("swap_prob", n.swap_prob);
  n.memory_cutoff_slots = to_int(f.integer("memory_cutoff_slots", n.memory_cutoff_slots), f.path("memory_cutoff_slots"));
  return n;
}

inline std::string edge_name(const EdgeParams& e) { return "edge " + e.u + "-" + e.v; }

}  // namespace detail

/// Resolves the scenario against its graph: requests and analysis targets must
/// name existing nodes and edges. Graph construction errors are forwarded.
inline void validate_scenario(const Scenario& s) {
  if (s.version != kScenarioVersion) {
    throw ValidationError("scenario version " + std::to_string(s.version) + " is not supported (expected " +
                          std::to_string(kScenarioVersion) + ")");
  }
  if (!(s.elementary_fidelity > 0.25 && s.elementary_fidelity <= 1.0)) {
    throw ValidationError("physical.elementary_fidelity must lie in (0.25, 1]");
  }
  const NetworkGraph g = s.graph();
  std::set<std::string> ids;
  for (const auto& r : s.requests) {
    const std::string where = "request '" + r.id + "'";
    if (r.id.empty()) throw ValidationError("request id must not be empty");
    if (!ids.insert(r.id).second) throw ValidationError(where + ": duplicate request id");
    if (!g.find_node(r.source)) throw ValidationError(where + ": unknown source '" + r.source + "'");
    if (!g.find_node(r.dest)) throw ValidationError(where + ": unknown dest '" + r.dest + "'");
    if (r.source == r.dest) throw ValidationError(where + ": source equals destination");
    if (!(r.rate_target > 0.0)) throw ValidationError(where + ": rate must be positive");
    if (!(r.min_fidelity > 0.25 && r.min_fidelity <= 1.0)) throw ValidationError(where + ": min_fidelity outside (0.25, 1]");
  }
  for (const auto& a : s.analysis) {
    const std::string where = "analysis '" + a.name + "'";
    try {
      PathSpec p = make_path(g, a.nodes);
      if (a.widths) {
        if (static_cast<int>(a.widths->size()) != p.hops()) throw ValidationError("needs one width per hop");
        for (std::size_t h = 0; h < a.widths->size(); ++h) {
          if ((*a.widths)[h] < 0 || (*a.widths)[h] > p.per_hop_capacity[h]) {
            throw ValidationError("width outside [0, capacity] on hop " + std::to_string(h));
          }
        }
      }
      for (const auto& pol : a.policies) {
        if (pol.kind == PolicyKind::kExplicitTree) pol.tree_for(p.hops());
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (s.routing.k < 1) throw ValidationError("routing.k must be at least 1");
  if (!is_additive(s.routing.metric)) throw ValidationError("routing.metric must be additive");
  if (s.simulation.slots < 1) throw ValidationError("simulation.slots must be positive");
  if (s.simulation.max_paths < 1) throw ValidationError("simulation.max_paths must be at least 1");
}

inline Scenario scenario_from_json(const nlohmann::json& root) {
  using detail::Fields;
  Fields top(root, "scenario");
  top.allow_only({"version", "physical", "nodes", "edges", "grid", "requests", "analysis", "routing", "simulation",
                  "output"});
  Scenario s;
  if (!top.has("version")) throw ValidationError("scenario: missing field 'version'");
  s.version = detail::to_int(top.integer("version"), "scenario.version");
  if (s.version != kScenarioVersion) {
    throw ValidationError("scenario version " + std::to_string(s.version) + " is not supported (expected " +
                          std::to_string(kScenarioVersion) + ")");
  }

  if (top.has("physical")) {
    Fields f(top.raw("physical"), "physical");
    f.allow_only({"attenuation_per_km", "attempts_per_slot", "base_efficiency", "elementary_fidelity",
                  "swap_prob_check"});
    s.physical.attenuation_alpha = f.num("attenuation_per_km", s.physical.attenuation_alpha);
    s.physical.attempts_per_slot =
        detail::to_int(f.integer("attempts_per_slot", s.physical.attempts_per_slot), f.path("attempts_per_slot"));
    s.physical.base_efficiency = f.num("base_efficiency", s.physical.base_efficiency);
    s.elementary_fidelity = f.num("elementary_fidelity", s.elementary_fidelity);
    s.physical.swap_check = detail::parse_swap_check(f.str("swap_prob_check", "warn"), f.path("swap_prob_check"));
  }

  if (top.has("grid")) {
    if (top.has("nodes") || top.has("edges")) throw ValidationError("scenario: give either grid or nodes/edges");
    Fields g(top.raw("grid"), "grid");
    g.allow_only({"rows", "cols", "node", "edge"});
    const int rows = detail::to_int(g.integer("rows"), g.path("rows"));
    const int cols = detail::to_int(g.integer("cols"), g.path("cols"));
    NodeParams node_t = g.has("node") ? detail::node_from_json(g.raw("node"), "grid.node", false) : NodeParams{};
    EdgeParams edge_t = g.has("edge") ? detail::edge_from_json(g.raw("edge"), "grid.edge", false) : EdgeParams{};
    const NetworkGraph grid = grid_topology(rows, cols, edge_t, node_t, s.physical);
    s.nodes = grid.node_specs();
    s.edges = grid.edge_specs();
  } else {
    if (top.has("nodes")) {
      const auto& arr = top.array("nodes");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        s.nodes.push_back(detail::node_from_json(arr[i], "nodes[" + std::to_string(i) + "]", true));
      }
    }
    if (top.has("edges")) {
      const auto& arr = top.array("edges");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        s.edges.push_back(detail::edge_from_json(arr[i], "edges[" + std::to_string(i) + "]", true));
      }
    }
  }

  if (top.has("requests")) {
    const auto& arr = top.array("requests");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Fields f(arr[i], "requests[" + std::to_string(i) + "]");
      f.allow_only({"id", "source", "dest", "rate", "min_fidelity"});
      Request r;
      r.id = f.str("id");
      r.source = f.str("source");
      r.dest = f.str("dest");
      r.rate_target = f.num("rate", r.rate_target);
      r.min_fidelity = f.num("min_fidelity", r.min_fidelity);
      s.requests.push_back(std::move(r));
    }
  }

  if (top.has("analysis")) {
    const auto& arr = top.array("analysis");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "analysis[" + std::to_string(i) + "]";
      Fields f(arr[i], where);
      f.allow_only({"name", "nodes", "widths", "policies", "order_search"});
      AnalysisTarget a;
      a.name = f.str("name", "path" + std::to_string(i));
      for (const auto& n : f.array("nodes")) {
        if (!n.is_string()) throw ValidationError(where + ".nodes: expected node id strings");
        a.nodes.push_back(n.get<std::string>());
      }
      if (f.has("widths")) {
        std::vector<int> w;
        for (const auto& x : f.array("widths")) {
          if (!x.is_number_integer()) throw ValidationError(where + ".widths: expected integers");
          w.push_back(x.get<int>());
        }
        a.widths = std::move(w);
      }
      if (f.has("policies")) {
        const auto& pols = f.array("policies");
        for (std::size_t k = 0; k < pols.size(); ++k) {
          a.policies.push_back(detail::policy_from_json(pols[k], where + ".policies[" + std::to_string(k) + "]"));
        }
      } else {
        a.policies = {SwapPolicy::parallel(), SwapPolicy::sequential(), SwapPolicy::doubling()};
      }
      a.order_search = f.boolean("order_search", false);
      s.analysis.push_back(std::move(a));
    }
  }

  if (top.has("routing")) {
    Fields f(top.raw("routing"), "routing");
    f.allow_only({"k", "metric", "policy", "utility"});
    s.routing.k = detail::to_int(f.integer("k", s.routing.k), f.path("k"));
    if (f.has("metric")) {
      try {
        s.routing.metric = parse_metric(f.str("metric"));
      } catch (const ValidationError& e) {
        throw ValidationError(f.path("metric") + ": " + e.what());
      }
    }
    if (f.has("policy")) s.routing.policy = detail::policy_from_json(f.raw("policy"), f.path("policy"));
    if (f.has("utility")) {
      Fields u(f.raw("utility"), "routing.utility");
      u.allow_only({"kind", "weights"});
      s.routing.utility.kind = UtilitySpec::parse_kind(u.str("kind", "total"));
      if (u.has("weights")) {
        const auto& w = u.raw("weights");
        if (!w.is_object()) throw ValidationError("routing.utility.weights: expected an object");
        for (auto it = w.begin(); it != w.end(); ++it) {
          if (!it.value().is_number()) throw ValidationError("routing.utility.weights." + it.key() + ": expected a number");
          s.routing.utility.weights[it.key()] = it.value().get<double>();
        }
      }
    }
  }

  if (top.has("simulation")) {
    Fields f(top.raw("simulation"), "simulation");
    f.allow_only({"scheme", "mode", "policy", "slots", "seed", "node_disjoint", "max_paths"});
    try {
      s.simulation.scheme = parse_scheme(f.str("scheme", "proactive"));
      s.simulation.forwarding = parse_forwarding(f.str("mode", "sync"));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("simulation: ") + e.what());
    }
    if (f.has("policy")) s.simulation.policy = detail::policy_from_json(f.raw("policy"), f.path("policy"));
    s.simulation.slots = f.integer("slots", s.simulation.slots);
    const auto seed = f.integer("seed", static_cast<std::int64_t>(s.simulation.seed));
    if (seed < 0) throw ValidationError("simulation.seed must be non-negative");
    s.simulation.seed = static_cast<std::uint64_t>(seed);
    s.simulation.node_disjoint = f.boolean("node_disjoint", false);
    s.simulation.max_paths = detail::to_int(f.integer("max_paths", s.simulation.max_paths), f.path("max_paths"));
  }

  if (top.has("output")) {
    Fields f(top.raw("output"), "output");
    f.allow_only({"format"});
    const auto fmt = f.str("format", "json");
    if (fmt == "json") {
      s.format = OutputFormat::kJson;
    } else if (fmt == "csv") {
      s.format = OutputFormat::kCsv;
    } else {
      throw ValidationError("output.format: expected json or csv");
    }
  }

  validate_scenario(s);
  return s;
}

/// JSON form of a resolved scenario; scenario_from_json reads it back unchanged.
inline nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  json j;
  j["version"] = s.version;
  j["physical"] = {{"attenuation_per_km", s.physical.attenuation_alpha},
                   {"attempts_per_slot", s.physical.attempts_per_slot},
                   {"base_efficiency", s.physical.base_efficiency},
                   {"elementary_fidelity", s.elementary_fidelity},
                   {"swap_prob_check", detail::swap_check_name(s.physical.swap_check)}};
  j["nodes"] = json::array();
  for (const auto& n : s.nodes) {
    j["nodes"].push_back({{"id", n.id}, {"swap_prob", n.swap_prob}, {"memory_cutoff_slots", n.memory_cutoff_slots}});
  }
  j["edges"] = json::array();
  for (const auto& e : s.edges) j["edges"].push_back(detail::edge_to_json(e, true));
  j["requests"] = json::array();
  for (const auto& r : s.requests) {
    j["requests"].push_back({{"id", r.id},
                             {"source", r.source},
                             {"dest", r.dest},
                             {"rate", r.rate_target},
                             {"min_fidelity", r.min_fidelity}});
  }
  j["analysis"] = json::array();
  for (const auto& a : s.analysis) {
    json t{{"name", a.name}, {"nodes", a.nodes}, {"order_search", a.order_search}};
    if (a.widths) t["widths"] = *a.widths;
    t["policies"] = json::array();
    for (const auto& p : a.policies) t["policies"].push_back(detail::policy_to_json(p));
    j["analysis"].push_back(std::move(t));
  }
  json utility{{"kind", UtilitySpec::kind_name(s.routing.utility.kind)}};
  if (!s.routing.utility.weights.empty()) utility["weights"] = s.routing.utility.weights;
  j["routing"] = {{"k", s.routing.k},
                  {"metric", metric_name(s.routing.metric)},
                  {"policy", detail::policy_to_json(s.routing.policy)},
                  {"utility", utility}};
  json sim{{"scheme", scheme_name(s.simulation.scheme)},
           {"mode", forwarding_name(s.simulation.forwarding)},
           {"slots", s.simulation.slots},
           {"seed", s.simulation.seed},
           {"node_disjoint", s.simulation.node_disjoint},
           {"max_paths", s.simulation.max_paths}};
  if (s.simulation.policy) sim["policy"] = detail::policy_to_json(*s.simulation.policy);
  j["simulation"] = std::move(sim);
  j["output"] = {{"format", s.format == OutputFormat::kJson ? "json" : "csv"}};
  return j;
}

/// Parses scenario text; syntax errors report line and column.
inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "scenario") {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
  return scenario_from_json(root);
}

inline Scenario parse_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open scenario file '" + file + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), file);
}

}  // namespace qroute
