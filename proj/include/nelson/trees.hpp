#pragma once

#include <compare>
#include <cstdint>
#include <iterator>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace nelson {

/// Unordered vertex pair, stored with a < b. Vertices are 0-based.
struct Edge {
  int a = 0;
  int b = 0;
  Edge() = default;
  Edge(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}
  auto operator<=>(const Edge&) const = default;
};

/// Acyclic graph on the vertex set {0, ..., n-1}.
class Forest {
 public:
  Forest() = default;
  /// Throws std::invalid_argument on loops, repeated edges, out-of-range
  /// vertices or cycles.
  Forest(int vertex_count, std::vector<Edge> edges);

  int size() const { return vertex_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Component label per vertex; labels are the smallest vertex of each
  /// component.
  std::vector<int> components() const;
  bool is_tree() const { return static_cast<int>(edges_.size()) == vertex_count_ - 1; }
  /// neighbours[v] = list of (neighbour, edge index).
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;

 private:
  int vertex_count_ = 0;
  std::vector<Edge> edges_;
};

/// Spanning tree on {0, ..., n-1}; n = 1 is the single vertex with no edges.
class Tree : public Forest {
 public:
  Tree() = default;
  /// Throws std::invalid_argument unless the edges form a spanning tree.
  Tree(int vertex_count, std::vector<Edge> edges);
};

class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr int kMaxEnumeratedTreeSize = 9;
inline constexpr int kMaxEnumeratedForestSize = 5;

/// n^{n-2} for n >= 2 and 1 for n = 1.
std::uint64_t cayley_count(int n);

/// Prüfer code of length n-2 (empty for n <= 2).
std::vector<int> prufer_encode(const Tree& tree);
/// Inverse of prufer_encode; `sequence` must have length n-2 with entries in [0, n).
Tree prufer_decode(std::span<const int> sequence, int n);

/// Lazy sequence over all labelled trees on n vertices, in lexicographic
/// order of their Prüfer codes.
class TreeSequence {
 public:
  class iterator {
   public:
    using value_type = Tree;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    explicit iterator(int n);
    const Tree& operator*() const { return current_; }
    const Tree* operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const { return done_; }

   private:
    int n_ = 0;
    std::vector<int> code_;
    Tree current_;
    bool done_ = true;
  };

  explicit TreeSequence(int n) : n_(n) {}
  iterator begin() const { return iterator(n_); }
  std::default_sentinel_t end() const { return {}; }
  std::uint64_t size() const { return cayley_count(n_); }

 private:
  int n_;
};

/// Throws CapExceeded for n > 9; use sample_tree_uniform beyond that.
TreeSequence enumerate_trees(int n);

/// Uniform labelled tree via a uniform Prüfer code.
template <class Rng>
Tree sample_tree_uniform(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_tree_uniform: n must be >= 1");
  std::vector<int> code(n > 2 ? n - 2 : 0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (auto& c : code) c = pick(rng);
  return prufer_decode(code, n);
}

/// Lazy sequence over every forest on n vertices (including the empty one).
class ForestSequence {
 public:
  class iterator {
   public:
    using value_type = Forest;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    explicit iterator(int n);
    const Forest& operator*() const { return current_; }
    const Forest* operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const { return done_; }

   private:
    void advance_to_acyclic();
    int n_ = 0;
    std::vector<Edge> pairs_;
    std::uint64_t mask_ = 0;
    Forest current_;
    bool done_ = true;
  };

  explicit ForestSequence(int n) : n_(n) {}
  iterator begin() const { return iterator(n_); }
  std::default_sentinel_t end() const { return {}; }

 private:
  int n_;
};

/// Throws CapExceeded for n > 5.
ForestSequence enumerate_forests(int n);

std::vector<int> degrees(const Forest& forest);

/// (n-2)! / prod (d_i - 1)!, the number of labelled trees with the given
/// degree sequence. Throws std::invalid_argument when no tree matches.
std::uint64_t count_trees_with_degrees(std::span<const int> degree_sequence);

/// Visits every degree sequence d_i >= 1 with sum 2n-2.
template <class F>
void for_each_degree_sequence(int n, F&& visit) {
  if (n < 2) return;
  std::vector<int> seq(n, 1);
  int extra = n - 2;  // distribute over entries
  auto recurse = [&](auto&& self, int index, int remaining) -> void {
    if (index == n - 1) {
      seq[index] = 1 + remaining;
      visit(std::span<const int>(seq));
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      seq[index] = 1 + take;
      self(self, index + 1, remaining - take);
    }
  };
  recurse(recurse, 0, extra);
}

/// Edges of the unique simple path from i to j, in order from i. Throws
/// std::invalid_argument when i == j or the vertices lie in different
/// components.
std::vector<Edge> path_edges(const Forest& forest, int i, int j);

/// Breadth-first ordering from `root`: order[0] == root and parent[root] == -1.
struct RootedTree {
  std::vector<int> order;
  std::vector<int> parent;
};
RootedTree root_tree(const Tree& tree, int root = 0);

}  // namespace nelson
