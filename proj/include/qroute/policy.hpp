#pragma once

#include <optional>
#include <string>

#include "qroute/error.hpp"
#include "qroute/swap_order.hpp"

namespace qroute {

enum class PolicyKind {
  kSequential,
  kDoubling,
  kParallel,  // unheralded: every interior node swaps at once
  kAdHoc,     // swap as soon as two adjacent segments coexist
  kExplicitTree,
};

/// Swapping policy attached to a path.
struct SwapPolicy {
  PolicyKind kind = PolicyKind::kDoubling;
  std::optional<SwapOrderTree> tree;  // set only for kExplicitTree

  static SwapPolicy sequential() { return {PolicyKind::kSequential, std::nullopt}; }
  static SwapPolicy doubling() { return {PolicyKind::kDoubling, std::nullopt}; }
  static SwapPolicy parallel() { return {PolicyKind::kParallel, std::nullopt}; }
  static SwapPolicy ad_hoc() { return {PolicyKind::kAdHoc, std::nullopt}; }
  static SwapPolicy explicit_tree(SwapOrderTree t) {
    t.validate();
    return {PolicyKind::kExplicitTree, std::move(t)};
  }

  /// Accepts "sequential", "doubling", "parallel", "adhoc", or a bracketed
  /// tree such as "((0 1) 2)".
  static SwapPolicy parse(const std::string& name) {
    if (name == "sequential") return sequential();
    if (name == "doubling") return doubling();
    if (name == "parallel") return parallel();
    if (name == "adhoc" || name == "ad-hoc") return ad_hoc();
    if (!name.empty() && (name.front() == '(' || std::isdigit(static_cast<unsigned char>(name.front())))) {
      return explicit_tree(SwapOrderTree::parse(name));
    }
    throw ValidationError("unknown swap policy '" + name + "'");
  }

  std::string name() const {
    switch (kind) {
      case PolicyKind::kSequential: return "sequential";
      case PolicyKind::kDoubling: return "doubling";
      case PolicyKind::kParallel: return "parallel";
      case PolicyKind::kAdHoc: return "adhoc";
      case PolicyKind::kExplicitTree: return tree ? tree->to_string() : "tree";
    }
    return "unknown";
  }

  bool heralded() const { return kind != PolicyKind::kParallel; }

  /// Tree used for analytic evaluation on an n-hop path. Ad-hoc swapping has
  /// no fixed order; it is scored with the doubling tree.
  SwapOrderTree tree_for(int hops) const {
    switch (kind) {
      case PolicyKind::kSequential: return SwapOrderTree::sequential(hops);
      case PolicyKind::kDoubling:
      case PolicyKind::kAdHoc: return SwapOrderTree::doubling(hops);
      case PolicyKind::kExplicitTree:
        if (!tree || tree->hops() != hops) throw ValidationError("explicit swap tree does not match path length");
        return *tree;
      case PolicyKind::kParallel: break;
    }
    throw ValidationError("parallel swapping has no swap tree");
  }

  friend bool operator==(const SwapPolicy& x, const SwapPolicy& y) {
    return x.kind == y.kind && x.tree == y.tree;
  }
};

}  // namespace qroute
