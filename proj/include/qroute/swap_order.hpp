#pragma once

#include <cctype>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "qroute/error.hpp"

namespace qroute {

/// Binary tree over the hops of a path. Leaves are hops in left-to-right
/// order; each internal node is a swap at the path node shared by its two
/// child spans. Nodes are stored in post-order, so iterating `nodes()` visits
/// swaps in a valid execution order and the root comes last.
class SwapOrderTree {
 public:
  struct Node {
    int first_hop = 0;
    int last_hop = 0;
    int left = -1;
    int right = -1;

    bool is_leaf() const { return left < 0; }
    int hop_count() const { return last_hop - first_hop + 1; }
  };

  static SwapOrderTree leaf(int hop) {
    SwapOrderTree t;
    t.nodes_.push_back({hop, hop, -1, -1});
    return t;
  }

  /// Combines two trees over adjacent spans; the swap happens at the node
  /// between `left`'s last hop and `right`'s first hop.
  static SwapOrderTree join(const SwapOrderTree& left, const SwapOrderTree& right) {
    if (left.nodes_.empty() || right.nodes_.empty()) throw ValidationError("cannot join an empty swap tree");
    if (left.root().last_hop + 1 != right.root().first_hop) {
      throw ValidationError("swap tree spans are not adjacent");
    }
    SwapOrderTree t;
    t.nodes_.reserve(left.nodes_.size() + right.nodes_.size() + 1);
    t.nodes_ = left.nodes_;
    const int offset = static_cast<int>(left.nodes_.size());
    for (Node n : right.nodes_) {
      if (!n.is_leaf()) {
        n.left += offset;
        n.right += offset;
      }
      t.nodes_.push_back(n);
    }
    t.nodes_.push_back({left.root().first_hop, right.root().last_hop, offset - 1,
                        static_cast<int>(t.nodes_.size()) - 1});
    return t;
  }

  /// Left-to-right chain: node 1 swaps first, then node 2, and so on.
  static SwapOrderTree sequential(int hops) { return sequential_span(0, checked(hops) - 1); }

  /// Balanced tree of height ceil(log2 n); the left half takes the extra hop.
  static SwapOrderTree doubling(int hops) { return doubling_span(0, checked(hops) - 1); }

  /// Parses the bracket notation produced by `to_string`, e.g. "((0 1) (2 3))".
  static SwapOrderTree parse(std::string_view text) {
    std::size_t pos = 0;
    SwapOrderTree t = parse_node(text, pos);
    skip_space(text, pos);
    if (pos != text.size()) throw ValidationError("trailing characters in swap order");
    t.validate();
    return t;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.back(); }
  const Node& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  int hops() const { return nodes_.empty() ? 0 : root().hop_count(); }

  /// Path-node index of the swap performed at an internal node.
  int merge_point(const Node& n) const { return node(n.left).last_hop + 1; }

  /// Interior nodes in execution (post-order) sequence.
  std::vector<int> swap_sequence() const {
    std::vector<int> out;
    for (const auto& n : nodes_) {
      if (!n.is_leaf()) out.push_back(merge_point(n));
    }
    return out;
  }

  /// Checks that the tree covers hops 0..n-1 exactly once, in order.
  void validate() const {
    if (nodes_.empty()) throw ValidationError("empty swap tree");
    if (root().first_hop != 0) throw ValidationError("swap tree must start at hop 0");
    int expected = 0;
    for (const auto& n : nodes_) {
      if (n.is_leaf()) {
        if (n.first_hop != expected || n.last_hop != expected) {
          throw ValidationError("swap tree leaves are not in hop order");
        }
        ++expected;
      } else {
        const Node& l = node(n.left);
        const Node& r = node(n.right);
        if (l.first_hop != n.first_hop || r.last_hop != n.last_hop || l.last_hop + 1 != r.first_hop) {
          throw ValidationError("swap tree internal node spans are inconsistent");
        }
      }
    }
  }

  std::string to_string() const { return nodes_.empty() ? std::string() : render(static_cast<int>(nodes_.size()) - 1); }

  friend bool operator==(const SwapOrderTree& x, const SwapOrderTree& y) {
    if (x.nodes_.size() != y.nodes_.size()) return false;
    for (std::size_t i = 0; i < x.nodes_.size(); ++i) {
      const auto& a = x.nodes_[i];
      const auto& b = y.nodes_[i];
      if (a.first_hop != b.first_hop || a.last_hop != b.last_hop || a.left != b.left || a.right != b.right) {
        return false;
      }
    }
    return true;
  }

 private:
  static int checked(int hops) {
    if (hops < 1) throw ValidationError("swap tree needs at least one hop");
    return hops;
  }

  static SwapOrderTree sequential_span(int first, int last) {
    SwapOrderTree t = leaf(first);
    for (int h = first + 1; h <= last; ++h) t = join(t, leaf(h));
    return t;
  }

  static SwapOrderTree doubling_span(int first, int last) {
    if (first == last) return leaf(first);
    const int count = last - first + 1;
    const int left_count = count - count / 2;
    return join(doubling_span(first, first + left_count - 1), doubling_span(first + left_count, last));
  }

  std::string render(int index) const {
    const Node& n = node(index);
    if (n.is_leaf()) return std::to_string(n.first_hop);
    return "(" + render(n.left) + " " + render(n.right) + ")";
  }

  static void skip_space(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  static SwapOrderTree parse_node(std::string_view s, std::size_t& pos) {
    skip_space(s, pos);
    if (pos >= s.size()) throw ValidationError("unexpected end of swap order");
    if (s[pos] == '(') {
      ++pos;
      SwapOrderTree l = parse_node(s, pos);
      SwapOrderTree r = parse_node(s, pos);
      skip_space(s, pos);
      if (pos >= s.size() || s[pos] != ')') throw ValidationError("expected ')' in swap order");
      ++pos;
      return join(l, r);
    }
    if (!std::isdigit(static_cast<unsigned char>(s[pos]))) throw ValidationError("expected hop index in swap order");
    int hop = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      hop = hop * 10 + (s[pos] - '0');
      ++pos;
    }
    return leaf(hop);
  }

  std::vector<Node> nodes_;
};

/// Catalan number C_n; C_{n-1} counts the swap orders of an n-hop path.
inline std::uint64_t catalan(int n) {
  if (n < 0) return 0;
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) c = c * 2 * (2 * static_cast<std::uint64_t>(i) + 1) / (static_cast<std::uint64_t>(i) + 2);
  return c;
}

namespace detail {

inline std::vector<SwapOrderTree> all_swap_orders_span(int first, int last) {
  if (first == last) return {SwapOrderTree::leaf(first)};
  std::vector<SwapOrderTree> out;
  // Largest left span first, so the left-deep (sequential) tree leads.
  for (int split = last; split > first; --split) {
    const auto lefts = all_swap_orders_span(first, split - 1);
    const auto rights = all_swap_orders_span(split, last);
    for (const auto& l : lefts) {
      for (const auto& r : rights) out.push_back(SwapOrderTree::join(l, r));
    }
  }
  return out;
}

}  // namespace detail

/// Visits every swap order of an n-hop path in canonical order (left-deep
/// first). Returns the number of trees visited.
inline std::uint64_t enumerate_swap_orders(int hops, const std::function<void(const SwapOrderTree&)>& visit) {
  if (hops < 1) throw ValidationError("swap tree needs at least one hop");
  if (hops == 1) {
    visit(SwapOrderTree::leaf(0));
    return 1;
  }
  std::uint64_t count = 0;
  const int last = hops - 1;
  for (int split = last; split > 0; --split) {
    const auto lefts = detail::all_swap_orders_span(0, split - 1);
    const auto rights = detail::all_swap_orders_span(split, last);
    for (const auto& l : lefts) {
      for (const auto& r : rights) {
        visit(SwapOrderTree::join(l, r));
        ++count;
      }
    }
  }
  return count;
}

}  // namespace qroute
