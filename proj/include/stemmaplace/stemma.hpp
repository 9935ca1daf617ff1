#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace stemmaplace {

using Edge = std::pair<std::string, std::string>;  // (parent, child)

// Rooted tree of witnesses. Immutable once built; nodes are kept in sorted
// order and addressed either by id or by their index in that order.
class Stemma {
 public:
  // Validates that the edges form a single rooted tree with at least two
  // nodes. `extra_nodes` declares nodes that may have no edges (they are
  // rejected as Disconnected unless they also appear in an edge).
  static Stemma from_edges(std::vector<Edge> edges,
                           const std::vector<std::string>& extra_nodes = {});

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& nodes() const { return ids_; }
  const std::string& root() const { return ids_[root_]; }
  std::size_t root_index() const { return root_; }

  bool contains(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;  // throws UnknownNode
  const std::string& id(std::size_t index) const { return ids_[index]; }

  // Parent of a non-root node; nullopt for the root.
  std::optional<std::string> parent(std::string_view id) const;
  std::optional<std::size_t> parent_index(std::size_t index) const;
  const std::vector<std::size_t>& child_indices(std::size_t index) const { return children_[index]; }
  std::vector<std::string> children(std::string_view id) const;
  bool is_leaf(std::string_view id) const;

  // Edges in (parent, child) sorted order.
  std::vector<Edge> edges() const;

  // Out-degree-0 nodes in sorted order.
  std::vector<std::string> leaves() const;

  // Backbone without leaf `q`. The former parent stays even if it becomes a
  // leaf or a pass-through node.
  Stemma remove_leaf(std::string_view q) const;

  // Pre-order traversal from the root, children visited in sorted order.
  std::vector<std::size_t> preorder() const;

  std::string to_edge_list() const;
  std::string to_newick() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t root_ = 0;
};

// Parses "parent<TAB>child" lines; blank lines and lines starting with '#'
// are skipped.
Stemma load_stemma(std::string_view edge_list_text);

// All-pairs edge counts on the undirected tree, in the stemma's node order.
class DistanceMatrix {
 public:
  using value_type = std::uint16_t;

  explicit DistanceMatrix(const Stemma& stemma);

  std::size_t size() const { return order_.size(); }
  const std::vector<std::string>& order() const { return order_; }
  int at(std::size_t i, std::size_t j) const { return d_[i * order_.size() + j]; }
  int at(std::string_view a, std::string_view b) const;
  std::size_t index_of(std::string_view id) const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<value_type> d_;
};

inline DistanceMatrix distance_matrix(const Stemma& s) { return DistanceMatrix(s); }

}  // namespace stemmaplace
