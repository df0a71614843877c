#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "qroute/distribution.hpp"
#include "qroute/error.hpp"
#include "qroute/path.hpp"
#include "qroute/policy.hpp"
#include "qroute/swap_order.hpp"

namespace qroute {

/// Work counters for checking the complexity contract without timing.
struct OpCounter {
  std::uint64_t recursion_states = 0;  // prefix-minimum entries produced
  std::uint64_t merge_terms = 0;       // inner-loop terms of heralded merges
  std::uint64_t thinning_terms = 0;    // inner-loop terms of the final binomial thinning
};

namespace detail {

inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string(what) + " outside [0, 1]");
}

/// Binomial(n, p) pmf, k = 0..n.
inline std::vector<double> binomial_row(int n, double p) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
  if (p <= 0.0) {
    row[0] = 1.0;
    return row;
  }
  if (p >= 1.0) {
    row.back() = 1.0;
    return row;
  }
  if (n <= 512) {
    double coef = 1.0;
    for (int k = 0; k <= n; ++k) {
      row[static_cast<std::size_t>(k)] = coef * std::pow(p, k) * std::pow(1.0 - p, n - k);
      coef = coef * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
  } else {
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    for (int k = 0; k <= n; ++k) {
      const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      row[static_cast<std::size_t>(k)] = std::exp(lc + k * lp + (n - k) * lq);
    }
  }
  return row;
}

/// Thins a count distribution: each of l successes survives independently
/// with probability q. Entry 0 is the complement of the rest.
inline std::vector<double> binomial_thin(std::span<const double> counts, double q, std::uint64_t* ops) {
  std::vector<double> out(counts.size(), 0.0);
  for (std::size_t l = 1; l < counts.size(); ++l) {
    if (counts[l] == 0.0) continue;
    const auto row = binomial_row(static_cast<int>(l), q);
    for (std::size_t k = 1; k <= l; ++k) out[k] += counts[l] * row[k];
    if (ops) *ops += l;
  }
  double rest = 0.0;
  for (std::size_t k = 1; k < out.size(); ++k) rest += out[k];
  out[0] = 1.0 - rest;
  return out;
}

/// Distribution of min(X, Y) for independent X ~ left, Y ~ right, truncated to
/// `cap` = min of the supports.
inline std::vector<double> min_of_independent(std::span<const double> left, std::span<const double> right,
                                              std::uint64_t* ops) {
  const std::size_t cap = std::min(left.size(), right.size()) - 1;
  // tail_r[k] = P(Y >= k), tail_l[k] = P(X > k)
  std::vector<double> tail_r(right.size() + 1, 0.0);
  for (std::size_t k = right.size(); k-- > 0;) tail_r[k] = tail_r[k + 1] + right[k];
  std::vector<double> above_l(left.size() + 1, 0.0);
  for (std::size_t k = left.size(); k-- > 0;) above_l[k] = above_l[k + 1] + (k + 1 < left.size() ? left[k + 1] : 0.0);
  std::vector<double> out(cap + 1, 0.0);
  double rest = 0.0;
  for (std::size_t k = 1; k <= cap; ++k) {
    out[k] = left[k] * tail_r[k] + right[k] * above_l[k];
    rest += out[k];
  }
  out[0] = 1.0 - rest;
  if (ops) *ops += cap + 1;
  return out;
}

}  // namespace detail

/// Binomial(cap, p) number of elementary entanglements on one edge.
inline Distribution link_distribution(int cap, double p) {
  if (cap < 0) throw ValidationError("link capacity must be non-negative");
  detail::require_probability(p, "link probability");
  return Distribution(detail::binomial_row(cap, p));
}

/// Minimum hop capacity over hops i+1..j, i.e. between path nodes i and j.
inline int subpath_capacity(const PathSpec& path, int i, int j) {
  if (!(0 <= i && i < j && j <= path.hops())) throw ValidationError("subpath indices must satisfy 0 <= i < j <= n");
  return *std::min_element(path.per_hop_capacity.begin() + i, path.per_hop_capacity.begin() + j);
}

/// Order in which the prefix-minimum recursion absorbs hops. The result does
/// not depend on it; both are exposed for verification.
enum class HopOrder { kLeftToRight, kRightToLeft };

/// End-to-end entanglement count when every interior node swaps
/// independently and simultaneously, with ascending-id qubit binding.
inline Distribution unheralded_path_distribution(const PathSpec& path, HopOrder order = HopOrder::kLeftToRight,
                                                 OpCounter* counter = nullptr) {
  path.validate();
  const int n = path.hops();
  auto hop_at = [&](int step) { return order == HopOrder::kLeftToRight ? step : n - 1 - step; };

  const int first = hop_at(0);
  Distribution first_link = link_distribution(path.per_hop_capacity[first], path.per_hop_prob[first]);
  if (n == 1) return first_link;

  std::vector<double> prefix(first_link.pmf().begin(), first_link.pmf().end());
  if (counter) counter->recursion_states += prefix.size();
  for (int step = 1; step < n; ++step) {
    const int h = hop_at(step);
    const auto link = detail::binomial_row(path.per_hop_capacity[h], path.per_hop_prob[h]);
    prefix = detail::min_of_independent(prefix, link, counter ? &counter->recursion_states : nullptr);
  }

  double q_bar = 1.0;
  for (double q : path.interior_swap_probs) q_bar *= q;
  return Distribution(detail::binomial_thin(prefix, q_bar, counter ? &counter->thinning_terms : nullptr));
}

/// Swaps `left` (x,y)-entanglements with `right` (y,z)-entanglements at node y:
/// min(i, j) attempts, each succeeding with probability q.
inline Distribution heralded_swap_merge(const Distribution& left, const Distribution& right, double q, int out_cap,
                                        OpCounter* counter = nullptr) {
  detail::require_probability(q, "swap probability");
  if (out_cap != std::min(left.cap(), right.cap())) {
    throw ValidationError("merge capacity must equal the smaller input capacity");
  }
  std::uint64_t* ops = counter ? &counter->merge_terms : nullptr;
  const auto paired = detail::min_of_independent(left.pmf(), right.pmf(), ops);
  return Distribution(detail::binomial_thin(paired, q, ops));
}

/// Folds heralded merges bottom-up over the swap tree.
inline Distribution heralded_path_distribution(const PathSpec& path, const SwapOrderTree& order,
                                               OpCounter* counter = nullptr) {
  path.validate();
  order.validate();
  if (order.hops() != path.hops()) throw ValidationError("swap tree has a different number of hops than the path");
  std::vector<Distribution> value(order.nodes().size());
  for (std::size_t i = 0; i < order.nodes().size(); ++i) {
    const auto& n = order.nodes()[i];
    if (n.is_leaf()) {
      value[i] = link_distribution(path.per_hop_capacity[static_cast<std::size_t>(n.first_hop)],
                                   path.per_hop_prob[static_cast<std::size_t>(n.first_hop)]);
    } else {
      const auto& l = value[static_cast<std::size_t>(n.left)];
      const auto& r = value[static_cast<std::size_t>(n.right)];
      const double q = path.interior_swap_probs[static_cast<std::size_t>(order.merge_point(n) - 1)];
      value[i] = heralded_swap_merge(l, r, q, std::min(l.cap(), r.cap()), counter);
    }
  }
  return value.back();
}

/// Mean number of end-to-end entanglements per slot.
inline double expected_throughput(const Distribution& dist) { return dist.mean(); }

/// Distribution under a policy: unheralded formula for parallel swapping,
/// heralded merge over the policy's tree otherwise.
inline Distribution path_distribution(const PathSpec& path, const SwapPolicy& policy) {
  if (policy.kind == PolicyKind::kParallel) return unheralded_path_distribution(path);
  return heralded_path_distribution(path, policy.tree_for(path.hops()));
}

inline constexpr int kDefaultOrderSearchLimit = 12;

struct OrderSearchResult {
  SwapOrderTree best;
  double ext = 0.0;
  std::uint64_t trees_enumerated = 0;
};

/// Exhaustive search over all Catalan(n-1) swap orders for the highest
/// expected throughput; ties keep the earliest tree in canonical order.
inline OrderSearchResult optimal_order_search(const PathSpec& path, int max_hops_limit = kDefaultOrderSearchLimit) {
  path.validate();
  if (path.hops() > max_hops_limit) {
    throw ValidationError("path has " + std::to_string(path.hops()) + " hops; order search limit is " +
                          std::to_string(max_hops_limit));
  }
  OrderSearchResult result;
  bool have = false;
  result.trees_enumerated = enumerate_swap_orders(path.hops(), [&](const SwapOrderTree& t) {
    const double ext = expected_throughput(heralded_path_distribution(path, t));
    if (!have || ext > result.ext + 1e-12) {
      result.best = t;
      result.ext = ext;
      have = true;
    }
  });
  return result;
}

/// Werner parameter w = (4F - 1) / 3.
inline double werner_parameter(double fidelity) { return (4.0 * fidelity - 1.0) / 3.0; }

/// Fidelity of an end-to-end pair built from n elementary Werner pairs.
inline double werner_fidelity_after_swaps(double f0, int n_hops) {
  if (!(f0 >= 0.25 && f0 <= 1.0)) throw ValidationError("elementary fidelity must lie in [0.25, 1]");
  if (n_hops < 1) throw ValidationError("hop count must be positive");
  return (1.0 + 3.0 * std::pow(werner_parameter(f0), n_hops)) / 4.0;
}

/// Returned by max_hops when perfect elementary pairs impose no bound.
inline constexpr int kUnboundedHops = INT_MAX;

/// Longest path whose end-to-end Werner fidelity still meets f_min.
inline int max_hops(double f0, double f_min) {
  if (!(f0 > 0.25 && f0 <= 1.0)) throw ValidationError("elementary fidelity must lie in (0.25, 1]");
  if (!(f_min > 0.25 && f_min <= 1.0)) throw ValidationError("minimum fidelity must lie in (0.25, 1]");
  if (f_min > f0) throw InfeasibleRequest("minimum fidelity exceeds elementary fidelity");
  if (f0 >= 1.0) return kUnboundedHops;
  const double ratio = std::log(werner_parameter(f_min)) / std::log(werner_parameter(f0));
  if (ratio >= static_cast<double>(kUnboundedHops - 1)) return kUnboundedHops - 1;
  int h = std::max(1, static_cast<int>(std::floor(ratio)));
  // Floor of a rounded ratio can land one off an exact integer boundary.
  if (werner_fidelity_after_swaps(f0, h + 1) >= f_min) ++h;
  while (h > 1 && werner_fidelity_after_swaps(f0, h) < f_min) --h;
  return h;
}

}  // namespace qroute
