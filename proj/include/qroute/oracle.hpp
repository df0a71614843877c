#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "qroute/distribution.hpp"
#include "qroute/error.hpp"
#include "qroute/path.hpp"
#include "qroute/swap_order.hpp"

namespace qroute {

/// Selects simultaneous independent swapping in brute_force_distribution.
struct Unheralded {};

using SwapSemantics = std::variant<SwapOrderTree, Unheralded>;

inline constexpr int kBruteForceMaxHops = 5;
inline constexpr int kBruteForceMaxCapacity = 3;

namespace detail {

/// Enumerates every success/failure pattern of every channel and returns the
/// probability of each per-hop link-count vector.
inline std::map<std::vector<int>, double> enumerate_link_outcomes(const PathSpec& path) {
  std::map<std::vector<int>, double> out;
  std::vector<std::pair<int, double>> channels;  // (hop, p)
  for (int h = 0; h < path.hops(); ++h) {
    for (int c = 0; c < path.per_hop_capacity[static_cast<std::size_t>(h)]; ++c) {
      channels.emplace_back(h, path.per_hop_prob[static_cast<std::size_t>(h)]);
    }
  }
  const std::uint64_t patterns = std::uint64_t{1} << channels.size();
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    std::vector<int> counts(static_cast<std::size_t>(path.hops()), 0);
    double prob = 1.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const bool up = (mask >> i) & 1U;
      prob *= up ? channels[i].second : 1.0 - channels[i].second;
      if (up) ++counts[static_cast<std::size_t>(channels[i].first)];
    }
    if (prob > 0.0) out[counts] += prob;
  }
  return out;
}

/// Unheralded: node m swaps its j-th left link with its j-th right link for
/// every j < min(left, right); lane j is end-to-end when every hop has a j-th
/// link and every interior swap on lane j succeeds.
inline void unheralded_outcomes(const PathSpec& path, const std::vector<int>& counts, double weight,
                                std::vector<double>& pmf) {
  const int n = path.hops();
  const int lanes = *std::min_element(counts.begin(), counts.end());
  std::vector<std::pair<int, int>> trials;  // (node, lane)
  for (int m = 1; m < n; ++m) {
    const int pairs = std::min(counts[static_cast<std::size_t>(m - 1)], counts[static_cast<std::size_t>(m)]);
    for (int j = 0; j < pairs; ++j) trials.emplace_back(m, j);
  }
  const std::uint64_t patterns = std::uint64_t{1} << trials.size();
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double prob = weight;
    std::vector<char> lane_ok(static_cast<std::size_t>(std::max(lanes, 0)), 1);
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const double q = path.interior_swap_probs[static_cast<std::size_t>(trials[t].first - 1)];
      const bool ok = (mask >> t) & 1U;
      prob *= ok ? q : 1.0 - q;
      if (!ok && trials[t].second < lanes) lane_ok[static_cast<std::size_t>(trials[t].second)] = 0;
    }
    const auto e2e = static_cast<std::size_t>(std::count(lane_ok.begin(), lane_ok.end(), 1));
    pmf[e2e] += prob;
  }
}

/// Heralded: walk the tree in post-order; at each swap, every one of the
/// min(left, right) attempts is enumerated as an independent success/failure.
inline void heralded_outcomes(const PathSpec& path, const SwapOrderTree& tree, std::size_t index,
                              std::vector<int>& stack, const std::vector<int>& counts, double prob,
                              std::vector<double>& pmf) {
  if (prob == 0.0) return;
  if (index == tree.nodes().size()) {
    pmf[static_cast<std::size_t>(stack.back())] += prob;
    return;
  }
  const auto& node = tree.nodes()[index];
  if (node.is_leaf()) {
    stack.push_back(counts[static_cast<std::size_t>(node.first_hop)]);
    heralded_outcomes(path, tree, index + 1, stack, counts, prob, pmf);
    stack.pop_back();
    return;
  }
  const int right = stack.back();
  stack.pop_back();
  const int left = stack.back();
  stack.pop_back();
  const int attempts = std::min(left, right);
  const double q = path.interior_swap_probs[static_cast<std::size_t>(tree.merge_point(node) - 1)];
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << attempts); ++mask) {
    double p = prob;
    int successes = 0;
    for (int a = 0; a < attempts; ++a) {
      const bool ok = (mask >> a) & 1U;
      p *= ok ? q : 1.0 - q;
      successes += ok ? 1 : 0;
    }
    stack.push_back(successes);
    heralded_outcomes(path, tree, index + 1, stack, counts, p, pmf);
    stack.pop_back();
  }
  stack.push_back(left);
  stack.push_back(right);
}

}  // namespace detail

/// Exact end-to-end distribution by exhaustive enumeration of every link and
/// swap trial. Independent of the closed-form recursions; used to verify them.
inline Distribution brute_force_distribution(const PathSpec& path, const SwapSemantics& semantics) {
  path.validate();
  if (path.hops() > kBruteForceMaxHops) throw StateSpaceTooLarge("brute force supports at most 5 hops");
  for (int c : path.per_hop_capacity) {
    if (c > kBruteForceMaxCapacity) throw StateSpaceTooLarge("brute force supports capacities up to 3");
  }
  if (const auto* tree = std::get_if<SwapOrderTree>(&semantics)) {
    tree->validate();
    if (tree->hops() != path.hops()) throw ValidationError("swap tree has a different number of hops than the path");
  }
  std::vector<double> pmf(static_cast<std::size_t>(path.width()) + 1, 0.0);
  for (const auto& [counts, weight] : detail::enumerate_link_outcomes(path)) {
    if (path.hops() == 1) {
      pmf[static_cast<std::size_t>(counts[0])] += weight;
    } else if (std::holds_alternative<Unheralded>(semantics)) {
      detail::unheralded_outcomes(path, counts, weight, pmf);
    } else {
      std::vector<int> stack;
      detail::heralded_outcomes(path, std::get<SwapOrderTree>(semantics), 0, stack, counts, weight, pmf);
    }
  }
  return Distribution(std::move(pmf));
}

}  // namespace qroute
