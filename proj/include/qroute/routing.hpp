#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qroute/analytics.hpp"
#include "qroute/error.hpp"
#include "qroute/net_model.hpp"
#include "qroute/path.hpp"
#include "qroute/pathfind.hpp"
#include "qroute/policy.hpp"

namespace qroute {

/// Demand for `rate_target` end-to-end pairs per slot at fidelity >= min_fidelity.
struct Request {
  std::string id;
  std::string source;
  std::string dest;
  double rate_target = 1.0;
  double min_fidelity = 0.5;

  friend bool operator==(const Request&, const Request&) = default;
};

enum class UtilityKind { kTotalThroughput, kSaturatingAtDelta, kWeightedSum };

struct UtilitySpec {
  UtilityKind kind = UtilityKind::kTotalThroughput;
  /// Per-request weights for kWeightedSum; missing ids weigh 1.
  std::map<std::string, double> weights;

  double weight(const std::string& id) const {
    auto it = weights.find(id);
    return it == weights.end() ? 1.0 : it->second;
  }

  /// U_r(delta_r, R_r); non-decreasing in R.
  double apply(const Request& r, double throughput) const {
    switch (kind) {
      case UtilityKind::kTotalThroughput: return throughput;
      case UtilityKind::kSaturatingAtDelta: return std::min(throughput, r.rate_target);
      case UtilityKind::kWeightedSum: return weight(r.id) * throughput;
    }
    return throughput;
  }

  static std::string kind_name(UtilityKind k) {
    switch (k) {
      case UtilityKind::kTotalThroughput: return "total";
      case UtilityKind::kSaturatingAtDelta: return "saturating";
      case UtilityKind::kWeightedSum: return "weighted";
    }
    return "total";
  }

  static UtilityKind parse_kind(const std::string& name) {
    if (name == "total") return UtilityKind::kTotalThroughput;
    if (name == "saturating") return UtilityKind::kSaturatingAtDelta;
    if (name == "weighted") return UtilityKind::kWeightedSum;
    throw ValidationError("unknown utility kind '" + name + "'");
  }

  friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;
};

struct AllocatedPath {
  PathSpec path;  // per-hop capacity holds the allocated width
  SwapPolicy policy;
};

struct RequestAllocation {
  Request request;
  bool feasible = true;
  std::string reason;
  int hop_limit = kUnboundedHops;
  std::vector<AllocatedPath> paths;
};

struct AllocationPlan {
  std::vector<RequestAllocation> requests;
  /// Unallocated capacity per edge, indexed like NetworkGraph::edges().
  std::vector<int> residual_capacity;
  /// Total utility after each committed increment; starts at 0.
  std::vector<double> utility_trace;

  const RequestAllocation& find(const std::string& id) const {
    for (const auto& r : requests) {
      if (r.request.id == id) return r;
    }
    throw ValidationError("unknown request '" + id + "'");
  }
};

struct RoutingConfig {
  int k = 4;
  UtilitySpec utility;
  SwapPolicy policy = SwapPolicy::doubling();
  double f0 = 1.0;  // elementary pair fidelity
  Metric candidate_metric = Metric::kInverseCreationRate;
};

inline double path_ext(const AllocatedPath& p) { return expected_throughput(path_distribution(p.path, p.policy)); }

/// Expected end-to-end pairs per slot summed over the request's paths.
inline double request_throughput(const AllocationPlan& plan, const std::string& request_id) {
  double total = 0.0;
  for (const auto& p : plan.find(request_id).paths) total += path_ext(p);
  return total;
}

inline double total_utility(const AllocationPlan& plan, const UtilitySpec& spec) {
  double total = 0.0;
  for (const auto& r : plan.requests) {
    if (!r.feasible) continue;
    total += spec.apply(r.request, request_throughput(plan, r.request.id));
  }
  return total;
}

/// Greedy marginal-utility allocator. Each step generates k-shortest
/// candidates per request on the residual graph, drops those over the
/// request's hop bound, and commits the single one-unit width increment with
/// the largest utility gain. Stops when no increment gains anything.
inline AllocationPlan allocate(const NetworkGraph& graph, const std::vector<Request>& requests,
                               const RoutingConfig& config) {
  if (config.k < 1) throw ValidationError("k must be at least 1");
  AllocationPlan plan;
  plan.residual_capacity.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) plan.residual_capacity.push_back(e.capacity());

  std::vector<double> throughput;
  for (const auto& r : requests) {
    if (!graph.find_node(r.source)) throw ValidationError("request '" + r.id + "': unknown source '" + r.source + "'");
    if (!graph.find_node(r.dest)) throw ValidationError("request '" + r.id + "': unknown dest '" + r.dest + "'");
    if (r.source == r.dest) throw ValidationError("request '" + r.id + "': source equals destination");
    RequestAllocation ra;
    ra.request = r;
    try {
      ra.hop_limit = max_hops(config.f0, r.min_fidelity);
    } catch (const InfeasibleRequest& e) {
      ra.feasible = false;
      ra.reason = e.what();
    }
    plan.requests.push_back(std::move(ra));
    throughput.push_back(0.0);
  }

  auto current_total = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < plan.requests.size(); ++i) {
      if (plan.requests[i].feasible) total += config.utility.apply(plan.requests[i].request, throughput[i]);
    }
    return total;
  };
  plan.utility_trace.push_back(current_total());

  constexpr double kMinGain = 1e-12;
  while (true) {
    struct Best {
      std::size_t request = 0;
      std::optional<std::size_t> existing;
      PathSpec path;
      double delta = 0.0;
      double gain = 0.0;
    };
    std::optional<Best> best;
    SearchConstraints residual{plan.residual_capacity, 1};

    for (std::size_t ri = 0; ri < plan.requests.size(); ++ri) {
      auto& ra = plan.requests[ri];
      if (!ra.feasible) continue;
      const auto candidates =
          k_shortest_paths(graph, ra.request.source, ra.request.dest, config.k, config.candidate_metric, residual);
      const double base = config.utility.apply(ra.request, throughput[ri]);
      for (const auto& cand : candidates) {
        if (cand.hops() > ra.hop_limit) continue;
        std::optional<std::size_t> existing;
        for (std::size_t pi = 0; pi < ra.paths.size(); ++pi) {
          if (ra.paths[pi].path.nodes == cand.nodes) existing = pi;
        }
        PathSpec widened;
        double delta = 0.0;
        if (existing) {
          const auto& cur = ra.paths[*existing];
          widened = cur.path.with_width(cur.path.width() + 1);
          delta = expected_throughput(path_distribution(widened, cur.policy)) - path_ext(cur);
        } else {
          widened = cand.with_width(1);
          delta = expected_throughput(path_distribution(widened, config.policy));
        }
        const double gain = config.utility.apply(ra.request, throughput[ri] + delta) - base;
        if (!best || gain > best->gain + 1e-15) best = Best{ri, existing, std::move(widened), delta, gain};
      }
    }
    if (!best || best->gain <= kMinGain) break;

    auto& ra = plan.requests[best->request];
    for (int e : path_edges(graph, best->path)) {
      auto& cap = plan.residual_capacity[static_cast<std::size_t>(e)];
      if (cap < 1) throw InternalError("allocator exceeded edge capacity");
      --cap;
    }
    if (best->existing) {
      ra.paths[*best->existing].path = std::move(best->path);
    } else {
      ra.paths.push_back({std::move(best->path), config.policy});
    }
    throughput[best->request] += best->delta;
    plan.utility_trace.push_back(current_total());
  }
  return plan;
}

}  // namespace qroute
