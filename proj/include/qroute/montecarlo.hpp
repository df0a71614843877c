#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qroute/analytics.hpp"
#include "qroute/error.hpp"
#include "qroute/net_model.hpp"
#include "qroute/path.hpp"
#include "qroute/pathfind.hpp"
#include "qroute/policy.hpp"
#include "qroute/rng.hpp"
#include "qroute/routing.hpp"

namespace qroute {

enum class RoutingScheme { kProactive, kReactive };
enum class Forwarding { kSync, kAsync };

inline std::string scheme_name(RoutingScheme s) { return s == RoutingScheme::kProactive ? "proactive" : "reactive"; }
inline std::string forwarding_name(Forwarding f) { return f == Forwarding::kSync ? "sync" : "async"; }

inline RoutingScheme parse_scheme(const std::string& s) {
  if (s == "proactive") return RoutingScheme::kProactive;
  if (s == "reactive") return RoutingScheme::kReactive;
  throw ValidationError("unknown routing scheme '" + s + "'");
}

inline Forwarding parse_forwarding(const std::string& s) {
  if (s == "sync") return Forwarding::kSync;
  if (s == "async") return Forwarding::kAsync;
  throw ValidationError("unknown forwarding mode '" + s + "'");
}

struct SimConfig {
  RoutingScheme scheme = RoutingScheme::kProactive;
  Forwarding forwarding = Forwarding::kSync;
  /// Overrides the plan's per-path policies; reactive runs default to doubling.
  std::optional<SwapPolicy> policy;
  std::int64_t slots = 1000;
  std::uint64_t seed = 1;
  bool node_disjoint = false;
  int reactive_max_paths = 4;
  /// Elementary fidelity; bounds reactive path length when set.
  std::optional<double> f0;
  bool check_conservation = true;
};

/// One elementary entanglement held on a specific channel of an edge.
struct LinkRecord {
  std::uint64_t id = 0;
  int edge = 0;
  int channel = 0;
  std::int64_t birth_slot = 0;
  std::int64_t expires_at = 0;  // first slot in which the link is gone
};

/// Entanglement spanning hops first_hop..last_hop of a lane.
struct Segment {
  std::uint64_t id = 0;
  int lane = 0;
  int first_hop = 0;
  int last_hop = 0;
  std::vector<LinkRecord> links;
  std::int64_t expires_at = 0;
};

struct SlotState {
  std::int64_t slot_index = 0;
  std::vector<std::vector<LinkRecord>> live_links;  // per edge, ascending id
  std::vector<Segment> live_segments;               // multi-hop, awaiting further swaps
  std::uint64_t next_id = 1;

  std::size_t record_count() const {
    std::size_t n = live_segments.size();
    for (const auto& v : live_links) n += v.size();
    return n;
  }
};

/// A path under simulation together with the channels it owns on each hop.
struct Lane {
  std::string request_id;
  PathSpec path;
  SwapPolicy policy;
  std::vector<int> edges;
  std::vector<int> first_channel;
  std::vector<int> channel_count;

  bool owns(int hop, const LinkRecord& link) const {
    const auto h = static_cast<std::size_t>(hop);
    return link.edge == edges[h] && link.channel >= first_channel[h] &&
           link.channel < first_channel[h] + channel_count[h];
  }
};

/// Tracks the fate of every entanglement record; each leaves exactly once.
class Ledger {
 public:
  enum class Fate { kSwapped, kDelivered, kExpired, kDiscarded };

  void create(std::uint64_t id) {
    if (!live_.insert(id).second) throw InternalError("entanglement id created twice");
    ++created_;
  }

  void retire(std::uint64_t id, Fate fate) {
    if (live_.erase(id) == 0) throw InternalError("entanglement consumed twice or never created");
    switch (fate) {
      case Fate::kSwapped: ++swapped_; break;
      case Fate::kDelivered: ++delivered_; break;
      case Fate::kExpired: ++expired_; break;
      case Fate::kDiscarded: ++discarded_; break;
    }
  }

  std::size_t live() const { return live_.size(); }
  std::uint64_t created() const { return created_; }
  std::uint64_t swapped() const { return swapped_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t expired() const { return expired_; }
  std::uint64_t discarded() const { return discarded_; }

 private:
  std::unordered_set<std::uint64_t> live_;
  std::uint64_t created_ = 0;
  std::uint64_t swapped_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t expired_ = 0;
  std::uint64_t discarded_ = 0;
};

struct SwapCounters {
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
};

struct LaneStats {
  std::string request_id;
  std::vector<std::string> nodes;
  std::string policy;
  int width = 0;
  std::uint64_t delivered = 0;
  /// histogram[k] = number of slots delivering exactly k pairs on this lane.
  std::vector<std::uint64_t> histogram;

  /// Empirical per-slot distribution of delivered pairs.
  std::vector<double> empirical_pmf(std::int64_t slots) const {
    std::vector<double> out;
    for (auto c : histogram) out.push_back(slots > 0 ? static_cast<double>(c) / static_cast<double>(slots) : 0.0);
    return out;
  }
};

struct SimStats {
  std::int64_t slots_run = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::uint64_t> delivered_per_request;
  /// Proactive: one entry per allocated path. Reactive: one entry per request.
  std::vector<LaneStats> lanes;
  std::map<std::string, SwapCounters> swaps_by_policy;
  std::uint64_t links_created = 0;
  std::uint64_t records_swapped = 0;
  std::uint64_t records_delivered = 0;
  std::uint64_t records_expired = 0;
  std::uint64_t records_discarded = 0;
  std::vector<std::string> warnings;
};

namespace detail {

/// Moves *it down to *keep during in-place compaction; skips the self-move,
/// which would empty the element's vectors.
template <class It>
inline void compact_move(It& keep, It it) {
  if (keep != it) *keep = std::move(*it);
  ++keep;
}

inline void add_to_histogram(std::vector<std::uint64_t>& hist, std::size_t k) {
  if (hist.size() <= k) hist.resize(k + 1, 0);
  ++hist[k];
}

struct Entanglement {
  std::uint64_t id = 0;
  int first_hop = 0;
  int last_hop = 0;
  std::vector<LinkRecord> links;
  std::int64_t expires_at = 0;
};

}  // namespace detail

struct InternalPhaseResult {
  std::vector<int> delivered_per_lane;
  std::map<std::string, SwapCounters> swaps_by_policy;
};

/// External phase: every free in-scope channel attempts an elementary
/// entanglement. `scope[e]` is the number of channels of edge e in use
/// (allocated widths for proactive runs, full capacity for reactive ones).
/// A channel is busy while it holds a live link or an outer qubit of a live
/// segment. Randomness is keyed by (slot, edge, channel).
inline std::vector<LinkRecord> sample_external_phase(const NetworkGraph& graph, std::span<const int> scope,
                                                     const KeyedRng& rng, SlotState& state, Ledger* ledger = nullptr) {
  if (scope.size() != graph.edge_count()) throw ValidationError("channel scope size differs from edge count");
  if (state.live_links.size() != graph.edge_count()) state.live_links.resize(graph.edge_count());
  std::vector<std::vector<char>> busy(graph.edge_count());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    busy[e].assign(static_cast<std::size_t>(graph.edge(static_cast<int>(e)).capacity()), 0);
    for (const auto& l : state.live_links[e]) busy[e][static_cast<std::size_t>(l.channel)] = 1;
  }
  for (const auto& seg : state.live_segments) {
    const auto& front = seg.links.front();
    const auto& back = seg.links.back();
    busy[static_cast<std::size_t>(front.edge)][static_cast<std::size_t>(front.channel)] = 1;
    busy[static_cast<std::size_t>(back.edge)][static_cast<std::size_t>(back.channel)] = 1;
  }

  std::vector<LinkRecord> created;
  const auto slot = state.slot_index;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    if (scope[e] < 0 || scope[e] > edge.capacity()) throw ValidationError("channel scope exceeds edge capacity");
    const int cutoff = std::min(graph.node(edge.a).memory_cutoff_slots, graph.node(edge.b).memory_cutoff_slots);
    for (int c = 0; c < scope[e]; ++c) {
      if (busy[e][static_cast<std::size_t>(c)]) continue;
      if (!rng.bernoulli(edge.link_prob, Stream::kExternal,
                         {static_cast<std::uint64_t>(slot), static_cast<std::uint64_t>(e),
                          static_cast<std::uint64_t>(c)})) {
        continue;
      }
      LinkRecord link{state.next_id++, static_cast<int>(e), c, slot, slot + cutoff};
      if (ledger) ledger->create(link.id);
      state.live_links[e].push_back(link);
      created.push_back(link);
    }
  }
  return created;
}

namespace detail {

class LaneRunner {
 public:
  LaneRunner(SlotState& state, const Lane& lane, int lane_index, const KeyedRng& rng, Ledger* ledger,
             SwapCounters& counters)
      : state_(state), lane_(lane), lane_index_(lane_index), rng_(rng), ledger_(ledger), counters_(counters) {
    interior_attempts_.assign(static_cast<std::size_t>(lane.path.hops()) + 1, 0);
    // Pull this lane's records out of the shared state.
    for (int h = 0; h < lane.path.hops(); ++h) {
      auto& links = state.live_links[static_cast<std::size_t>(lane.edges[static_cast<std::size_t>(h)])];
      auto keep = links.begin();
      for (auto it = links.begin(); it != links.end(); ++it) {
        if (lane.owns(h, *it)) {
          pool_.push_back({it->id, h, h, {*it}, it->expires_at});
        } else {
          *keep++ = *it;
        }
      }
      links.erase(keep, links.end());
    }
    auto keep = state.live_segments.begin();
    for (auto it = state.live_segments.begin(); it != state.live_segments.end(); ++it) {
      if (it->lane == lane_index) {
        pool_.push_back({it->id, it->first_hop, it->last_hop, std::move(it->links), it->expires_at});
      } else {
        detail::compact_move(keep, it);
      }
    }
    state.live_segments.erase(keep, state.live_segments.end());
  }

  int run() {
    const int n = lane_.path.hops();
    switch (lane_.policy.kind) {
      case PolicyKind::kParallel: run_parallel(); break;
      case PolicyKind::kAdHoc: run_ad_hoc(); break;
      default: run_tree(lane_.policy.tree_for(n)); break;
    }
    int delivered = 0;
    auto keep = pool_.begin();
    for (auto it = pool_.begin(); it != pool_.end(); ++it) {
      if (it->first_hop == 0 && it->last_hop == n - 1) {
        if (ledger_) ledger_->retire(it->id, Ledger::Fate::kDelivered);
        ++delivered;
      } else {
        detail::compact_move(keep, it);
      }
    }
    pool_.erase(keep, pool_.end());
    // Survivors go back to the shared state; sync runs discard them later.
    for (auto& ent : pool_) {
      if (ent.first_hop == ent.last_hop) {
        state_.live_links[static_cast<std::size_t>(ent.links.front().edge)].push_back(ent.links.front());
      } else {
        state_.live_segments.push_back(
            {ent.id, lane_index_, ent.first_hop, ent.last_hop, std::move(ent.links), ent.expires_at});
      }
    }
    for (int e : lane_.edges) {
      auto& links = state_.live_links[static_cast<std::size_t>(e)];
      std::sort(links.begin(), links.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    }
    return delivered;
  }

 private:
  /// Removes and returns the pool entries spanning exactly [first, last], by ascending id.
  std::vector<Entanglement> take(int first, int last) {
    std::vector<Entanglement> out;
    auto keep = pool_.begin();
    for (auto it = pool_.begin(); it != pool_.end(); ++it) {
      if (it->first_hop == first && it->last_hop == last) {
        out.push_back(std::move(*it));
      } else {
        detail::compact_move(keep, it);
      }
    }
    pool_.erase(keep, pool_.end());
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    return out;
  }

  bool draw_swap(int node) {
    const double q = lane_.path.interior_swap_probs[static_cast<std::size_t>(node - 1)];
    const auto attempt = interior_attempts_[static_cast<std::size_t>(node)]++;
    ++counters_.attempts;
    const bool ok = rng_.bernoulli(q, Stream::kSwap,
                                   {static_cast<std::uint64_t>(state_.slot_index), static_cast<std::uint64_t>(lane_index_),
                                    static_cast<std::uint64_t>(node), attempt});
    if (ok) ++counters_.successes;
    return ok;
  }

  /// Swaps at the node between `left` and `right`; both inputs are consumed.
  std::optional<Entanglement> swap(Entanglement&& left, Entanglement&& right) {
    const int node = left.last_hop + 1;
    const bool ok = draw_swap(node);
    if (ledger_) {
      ledger_->retire(left.id, Ledger::Fate::kSwapped);
      ledger_->retire(right.id, Ledger::Fate::kSwapped);
    }
    if (!ok) return std::nullopt;
    Entanglement merged;
    merged.id = state_.next_id++;
    merged.first_hop = left.first_hop;
    merged.last_hop = right.last_hop;
    merged.links = std::move(left.links);
    merged.links.insert(merged.links.end(), right.links.begin(), right.links.end());
    merged.expires_at = std::min(left.expires_at, right.expires_at);
    if (ledger_) ledger_->create(merged.id);
    return merged;
  }

  void pair_and_swap(std::vector<Entanglement>& lefts, std::vector<Entanglement>& rights) {
    const std::size_t pairs = std::min(lefts.size(), rights.size());
    for (std::size_t i = 0; i < pairs; ++i) {
      if (auto merged = swap(std::move(lefts[i]), std::move(rights[i]))) pool_.push_back(std::move(*merged));
    }
    for (std::size_t i = pairs; i < lefts.size(); ++i) pool_.push_back(std::move(lefts[i]));
    for (std::size_t i = pairs; i < rights.size(); ++i) pool_.push_back(std::move(rights[i]));
  }

  void run_tree(const SwapOrderTree& tree) {
    for (const auto& node : tree.nodes()) {
      if (node.is_leaf()) continue;
      const auto& l = tree.node(node.left);
      const auto& r = tree.node(node.right);
      auto lefts = take(l.first_hop, l.last_hop);
      auto rights = take(r.first_hop, r.last_hop);
      pair_and_swap(lefts, rights);
    }
  }

  void run_parallel() {
    const int n = lane_.path.hops();
    if (n == 1) return;
    std::vector<std::vector<Entanglement>> per_hop;
    std::size_t lanes = SIZE_MAX;
    for (int h = 0; h < n; ++h) {
      per_hop.push_back(take(h, h));
      lanes = std::min(lanes, per_hop.back().size());
    }
    for (std::size_t j = 0; j < lanes; ++j) {
      bool all_ok = true;
      for (int node = 1; node < n; ++node) all_ok = draw_swap(node) && all_ok;
      if (ledger_) {
        for (int h = 0; h < n; ++h) ledger_->retire(per_hop[static_cast<std::size_t>(h)][j].id, Ledger::Fate::kSwapped);
      }
      if (!all_ok) continue;
      Entanglement e2e;
      e2e.id = state_.next_id++;
      e2e.first_hop = 0;
      e2e.last_hop = n - 1;
      e2e.expires_at = per_hop[0][j].expires_at;
      for (int h = 0; h < n; ++h) {
        auto& src = per_hop[static_cast<std::size_t>(h)][j];
        e2e.links.insert(e2e.links.end(), src.links.begin(), src.links.end());
        e2e.expires_at = std::min(e2e.expires_at, src.expires_at);
      }
      if (ledger_) ledger_->create(e2e.id);
      pool_.push_back(std::move(e2e));
    }
    for (auto& hop : per_hop) {
      for (std::size_t j = lanes; j < hop.size(); ++j) pool_.push_back(std::move(hop[j]));
    }
  }

  void run_ad_hoc() {
    const int n = lane_.path.hops();
    bool changed = true;
    while (changed) {
      changed = false;
      for (int node = 1; node < n; ++node) {
        std::vector<Entanglement> lefts, rights;
        auto keep = pool_.begin();
        for (auto it = pool_.begin(); it != pool_.end(); ++it) {
          if (it->last_hop == node - 1) {
            lefts.push_back(std::move(*it));
          } else if (it->first_hop == node) {
            rights.push_back(std::move(*it));
          } else {
            detail::compact_move(keep, it);
          }
        }
        pool_.erase(keep, pool_.end());
        auto by_id = [](const auto& x, const auto& y) { return x.id < y.id; };
        std::sort(lefts.begin(), lefts.end(), by_id);
        std::sort(rights.begin(), rights.end(), by_id);
        if (!lefts.empty() && !rights.empty()) changed = true;
        pair_and_swap(lefts, rights);
      }
    }
  }

  SlotState& state_;
  const Lane& lane_;
  int lane_index_;
  const KeyedRng& rng_;
  Ledger* ledger_;
  SwapCounters& counters_;
  std::vector<Entanglement> pool_;
  std::vector<std::uint64_t> interior_attempts_;
};

}  // namespace detail

/// Internal phase: executes each lane's swap policy on the records it owns.
/// Swap randomness is keyed by (slot, lane, node, attempt). A swap consumes
/// both inputs whether or not it succeeds.
inline InternalPhaseResult run_internal_phase(SlotState& state, std::span<const Lane> lanes, Forwarding forwarding,
                                              const KeyedRng& rng, Ledger* ledger = nullptr) {
  InternalPhaseResult result;
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    if (lanes[i].policy.kind == PolicyKind::kAdHoc && forwarding == Forwarding::kSync) {
      throw ValidationError("ad-hoc swapping requires asynchronous forwarding");
    }
    auto& counters = result.swaps_by_policy[lanes[i].policy.name()];
    detail::LaneRunner runner(state, lanes[i], static_cast<int>(i), rng, ledger, counters);
    result.delivered_per_lane.push_back(runner.run());
  }
  return result;
}

namespace detail {

inline void purge_expired(SlotState& state, Ledger* ledger) {
  for (auto& links : state.live_links) {
    auto keep = links.begin();
    for (auto it = links.begin(); it != links.end(); ++it) {
      if (it->expires_at <= state.slot_index) {
        if (ledger) ledger->retire(it->id, Ledger::Fate::kExpired);
      } else {
        *keep++ = *it;
      }
    }
    links.erase(keep, links.end());
  }
  auto keep = state.live_segments.begin();
  for (auto it = state.live_segments.begin(); it != state.live_segments.end(); ++it) {
    if (it->expires_at <= state.slot_index) {
      if (ledger) ledger->retire(it->id, Ledger::Fate::kExpired);
    } else {
      detail::compact_move(keep, it);
    }
  }
  state.live_segments.erase(keep, state.live_segments.end());
}

inline void discard_all(SlotState& state, Ledger* ledger) {
  for (auto& links : state.live_links) {
    if (ledger) {
      for (const auto& l : links) ledger->retire(l.id, Ledger::Fate::kDiscarded);
    }
    links.clear();
  }
  if (ledger) {
    for (const auto& s : state.live_segments) ledger->retire(s.id, Ledger::Fate::kDiscarded);
  }
  state.live_segments.clear();
}

inline void validate_config(const SimConfig& config) {
  if (config.slots < 1) throw ValidationError("slot count must be positive");
  if (config.scheme == RoutingScheme::kReactive && config.forwarding == Forwarding::kAsync) {
    throw ValidationError("reactive routing recomputes paths every slot and supports synchronous forwarding only");
  }
  if (config.reactive_max_paths < 1) throw ValidationError("reactive max paths must be at least 1");
}

inline Lane make_lane(const NetworkGraph& graph, const std::string& request_id, const PathSpec& path,
                      const SwapPolicy& policy) {
  Lane lane;
  lane.request_id = request_id;
  lane.path = path;
  lane.policy = policy;
  lane.edges = path_edges(graph, path);
  if (policy.kind == PolicyKind::kExplicitTree) policy.tree_for(path.hops());
  return lane;
}

inline void finish_stats(SimStats& stats, const Ledger& ledger) {
  stats.links_created = ledger.created();
  stats.records_swapped = ledger.swapped();
  stats.records_delivered = ledger.delivered();
  stats.records_expired = ledger.expired();
  stats.records_discarded = ledger.discarded();
}

inline void check_balance(const SlotState& state, const Ledger& ledger, bool enabled) {
  if (enabled && ledger.live() != state.record_count()) {
    throw InternalError("ledger and slot state disagree on live entanglements");
  }
}

}  // namespace detail

/// Proactive simulation of a precomputed plan: paths keep fixed channels, and
/// each slot runs purge -> external phase -> internal phase -> statistics.
inline SimStats simulate(const NetworkGraph& graph, const AllocationPlan& plan, const SimConfig& config) {
  detail::validate_config(config);
  if (config.scheme != RoutingScheme::kProactive) throw ValidationError("reactive simulation takes requests, not a plan");

  std::vector<Lane> lanes;
  std::vector<int> used(graph.edge_count(), 0);
  for (const auto& ra : plan.requests) {
    for (const auto& ap : ra.paths) {
      Lane lane = detail::make_lane(graph, ra.request.id, ap.path, config.policy.value_or(ap.policy));
      for (int h = 0; h < ap.path.hops(); ++h) {
        const auto e = static_cast<std::size_t>(lane.edges[static_cast<std::size_t>(h)]);
        lane.first_channel.push_back(used[e]);
        lane.channel_count.push_back(ap.path.per_hop_capacity[static_cast<std::size_t>(h)]);
        used[e] += ap.path.per_hop_capacity[static_cast<std::size_t>(h)];
        if (used[e] > graph.edge(static_cast<int>(e)).capacity()) {
          throw ValidationError("plan allocates more than the capacity of edge " +
                                detail::edge_label(graph.edge(static_cast<int>(e)).spec));
        }
      }
      if (lane.policy.kind == PolicyKind::kAdHoc && config.forwarding == Forwarding::kSync) {
        throw ValidationError("ad-hoc swapping requires asynchronous forwarding");
      }
      lanes.push_back(std::move(lane));
    }
  }

  SimStats stats;
  stats.seed = config.seed;
  for (const auto& ra : plan.requests) stats.delivered_per_request[ra.request.id] = 0;
  for (const auto& lane : lanes) {
    stats.lanes.push_back({lane.request_id, lane.path.nodes, lane.policy.name(), lane.path.width(), 0, {}});
  }
  if (config.forwarding == Forwarding::kAsync &&
      std::all_of(graph.nodes().begin(), graph.nodes().end(), [](const auto& n) { return n.memory_cutoff_slots < 2; })) {
    stats.warnings.push_back("asynchronous run with one-slot memories behaves like synchronous forwarding");
  }

  const KeyedRng rng(config.seed);
  SlotState state;
  state.live_links.resize(graph.edge_count());
  Ledger ledger;
  for (std::int64_t slot = 0; slot < config.slots; ++slot) {
    state.slot_index = slot;
    detail::purge_expired(state, &ledger);
    sample_external_phase(graph, used, rng, state, &ledger);
    auto result = run_internal_phase(state, lanes, config.forwarding, rng, &ledger);
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      const auto k = static_cast<std::size_t>(result.delivered_per_lane[i]);
      stats.lanes[i].delivered += k;
      stats.delivered_per_request[lanes[i].request_id] += k;
      detail::add_to_histogram(stats.lanes[i].histogram, k);
    }
    for (const auto& [name, c] : result.swaps_by_policy) {
      stats.swaps_by_policy[name].attempts += c.attempts;
      stats.swaps_by_policy[name].successes += c.successes;
    }
    if (config.forwarding == Forwarding::kSync) detail::discard_all(state, &ledger);
    detail::check_balance(state, ledger, config.check_conservation);
    ++stats.slots_run;
  }
  detail::finish_stats(stats, ledger);
  return stats;
}

/// Reactive simulation: every slot generates links on all channels, then
/// computes link-disjoint (or node-disjoint) paths per request on the
/// realized logical topology and swaps along them.
inline SimStats simulate(const NetworkGraph& graph, const std::vector<Request>& requests, const SimConfig& config) {
  detail::validate_config(config);
  if (config.scheme != RoutingScheme::kReactive) throw ValidationError("proactive simulation needs an allocation plan");
  const SwapPolicy policy = config.policy.value_or(SwapPolicy::doubling());
  if (policy.kind == PolicyKind::kAdHoc) throw ValidationError("ad-hoc swapping requires asynchronous forwarding");
  if (policy.kind == PolicyKind::kExplicitTree) {
    throw ValidationError("reactive paths vary in length; use a named swap policy");
  }

  std::vector<std::optional<int>> hop_limit;
  for (const auto& r : requests) {
    graph.node_index(r.source);
    graph.node_index(r.dest);
    if (r.source == r.dest) throw ValidationError("request '" + r.id + "': source equals destination");
    std::optional<int> limit;
    if (config.f0) {
      try {
        limit = max_hops(*config.f0, r.min_fidelity);
      } catch (const InfeasibleRequest&) {
        limit = 0;  // no path is short enough
      }
    }
    hop_limit.push_back(limit);
  }

  SimStats stats;
  stats.seed = config.seed;
  for (const auto& r : requests) {
    stats.delivered_per_request[r.id] = 0;
    stats.lanes.push_back({r.id, {r.source, r.dest}, policy.name(), 0, 0, {}});
  }

  std::vector<int> scope;
  for (const auto& e : graph.edges()) scope.push_back(e.capacity());
  const KeyedRng rng(config.seed);
  SlotState state;
  state.live_links.resize(graph.edge_count());
  Ledger ledger;
  for (std::int64_t slot = 0; slot < config.slots; ++slot) {
    state.slot_index = slot;
    sample_external_phase(graph, scope, rng, state, &ledger);

    LogicalTopology logical;
    for (const auto& links : state.live_links) logical.counts.push_back(static_cast<int>(links.size()));
    std::vector<std::size_t> next_free(graph.edge_count(), 0);
    std::vector<Lane> lanes;
    std::vector<std::size_t> lane_request;
    for (std::size_t ri = 0; ri < requests.size(); ++ri) {
      if (hop_limit[ri] && *hop_limit[ri] < 1) continue;
      DisjointOptions opts{config.node_disjoint, hop_limit[ri]};
      const auto paths = disjoint_paths_on_logical(logical, graph, requests[ri].source, requests[ri].dest,
                                                   config.reactive_max_paths, opts);
      for (const auto& p : paths) {
        Lane lane = detail::make_lane(graph, requests[ri].id, p, policy);
        for (int e : lane.edges) {
          const auto ei = static_cast<std::size_t>(e);
          const auto& link = state.live_links[ei][next_free[ei]++];
          lane.first_channel.push_back(link.channel);
          lane.channel_count.push_back(1);
          --logical.counts[ei];
        }
        lanes.push_back(std::move(lane));
        lane_request.push_back(ri);
      }
    }
    auto result = run_internal_phase(state, lanes, config.forwarding, rng, &ledger);
    std::vector<std::size_t> per_request(requests.size(), 0);
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      per_request[lane_request[i]] += static_cast<std::size_t>(result.delivered_per_lane[i]);
    }
    for (std::size_t ri = 0; ri < requests.size(); ++ri) {
      stats.delivered_per_request[requests[ri].id] += per_request[ri];
      stats.lanes[ri].delivered += per_request[ri];
      detail::add_to_histogram(stats.lanes[ri].histogram, per_request[ri]);
    }
    for (const auto& [name, c] : result.swaps_by_policy) {
      stats.swaps_by_policy[name].attempts += c.attempts;
      stats.swaps_by_policy[name].successes += c.successes;
    }
    detail::discard_all(state, &ledger);
    detail::check_balance(state, ledger, config.check_conservation);
    ++stats.slots_run;
  }
  detail::finish_stats(stats, ledger);
  return stats;
}

}  // namespace qroute
