#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "qroute/error.hpp"

namespace qroute {

/// Loop-free node sequence with per-hop allocated width, link probability and
/// length, plus the swap probability of every interior node.
struct PathSpec {
  std::vector<std::string> nodes;
  std::vector<int> per_hop_capacity;
  std::vector<double> per_hop_prob;
  std::vector<double> per_hop_length_km;
  std::vector<double> interior_swap_probs;

  int hops() const { return static_cast<int>(per_hop_capacity.size()); }

  /// Minimum allocated width over all hops.
  int width() const {
    if (per_hop_capacity.empty()) return 0;
    return *std::min_element(per_hop_capacity.begin(), per_hop_capacity.end());
  }

  void validate() const {
    const std::size_t n = per_hop_capacity.size();
    if (n == 0) throw ValidationError("path must have at least one hop");
    if (nodes.size() != n + 1) throw ValidationError("path node count must be hops + 1");
    if (per_hop_prob.size() != n) throw ValidationError("path needs one link probability per hop");
    if (per_hop_length_km.size() != n) throw ValidationError("path needs one length per hop");
    if (interior_swap_probs.size() != n - 1) {
      throw ValidationError("path needs one swap probability per interior node");
    }
    std::set<std::string> seen;
    for (const auto& id : nodes) {
      if (!seen.insert(id).second) throw ValidationError("path revisits node '" + id + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (per_hop_capacity[i] < 0) throw ValidationError("path hop capacity must be non-negative");
      if (!(per_hop_prob[i] >= 0.0 && per_hop_prob[i] <= 1.0)) {
        throw ValidationError("path link probability outside [0, 1]");
      }
      if (!(per_hop_length_km[i] >= 0.0)) throw ValidationError("path hop length must be non-negative");
    }
    for (double q : interior_swap_probs) {
      if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("path swap probability outside [0, 1]");
    }
  }

  /// Same route with every hop set to the given width.
  PathSpec with_width(int width) const {
    PathSpec out = *this;
    std::fill(out.per_hop_capacity.begin(), out.per_hop_capacity.end(), width);
    return out;
  }

  /// Synthetic chain "0"-"1"-...-"n" for stand-alone analysis.
  static PathSpec chain(std::vector<int> caps, std::vector<double> probs, std::vector<double> swap_probs) {
    PathSpec p;
    for (std::size_t i = 0; i <= caps.size(); ++i) p.nodes.push_back(std::to_string(i));
    p.per_hop_length_km.assign(caps.size(), 0.0);
    p.per_hop_capacity = std::move(caps);
    p.per_hop_prob = std::move(probs);
    p.interior_swap_probs = std::move(swap_probs);
    p.validate();
    return p;
  }

  friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

}  // namespace qroute
