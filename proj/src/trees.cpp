#include "nelson/trees.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <string>

namespace nelson {

namespace {

struct DisjointSets {
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  bool unite(int u, int v) {
    u = find(u);
    v = find(v);
    if (u == v) return false;
    if (u > v) std::swap(u, v);
    parent[v] = u;
    return true;
  }
  std::vector<int> parent;
};

}  // namespace

Forest::Forest(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count < 1) throw std::invalid_argument("forest needs at least one vertex");
  DisjointSets sets(vertex_count);
  for (const auto& e : edges_) {
    if (e.a < 0 || e.b >= vertex_count) throw std::invalid_argument("edge vertex out of range");
    if (e.a == e.b) throw std::invalid_argument("loops are not allowed in a forest");
    if (!sets.unite(e.a, e.b)) throw std::invalid_argument("edge set contains a cycle");
  }
}

std::vector<int> Forest::components() const {
  DisjointSets sets(vertex_count_);
  for (const auto& e : edges_) sets.unite(e.a, e.b);
  std::vector<int> label(vertex_count_);
  for (int v = 0; v < vertex_count_; ++v) label[v] = sets.find(v);
  return label;
}

std::vector<std::vector<std::pair<int, int>>> Forest::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> nb(vertex_count_);
  for (int idx = 0; idx < static_cast<int>(edges_.size()); ++idx) {
    nb[edges_[idx].a].emplace_back(edges_[idx].b, idx);
    nb[edges_[idx].b].emplace_back(edges_[idx].a, idx);
  }
  return nb;
}

Tree::Tree(int vertex_count, std::vector<Edge> edges) : Forest(vertex_count, std::move(edges)) {
  if (!is_tree()) {
    throw std::invalid_argument("a tree on n vertices needs exactly n-1 edges");
  }
}

std::uint64_t cayley_count(int n) {
  if (n < 1) throw std::invalid_argument("cayley_count: n must be >= 1");
  std::uint64_t count = 1;
  for (int i = 0; i < n - 2; ++i) {
    if (__builtin_mul_overflow(count, static_cast<std::uint64_t>(n), &count)) {
      throw std::overflow_error("cayley_count overflows 64 bits");
    }
  }
  return count;
}

std::vector<int> prufer_encode(const Tree& tree) {
  const int n = tree.size();
  if (n <= 2) return {};
  auto deg = degrees(tree);
  auto nb = tree.adjacency();
  std::vector<bool> removed(n, false);
  std::set<int> leaves;
  for (int v = 0; v < n; ++v)
    if (deg[v] == 1) leaves.insert(v);
  std::vector<int> code;
  code.reserve(n - 2);
  for (int step = 0; step < n - 2; ++step) {
    const int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    removed[leaf] = true;
    for (const auto& [other, idx] : nb[leaf]) {
      (void)idx;
      if (removed[other]) continue;
      code.push_back(other);
      if (--deg[other] == 1) leaves.insert(other);
    }
  }
  return code;
}

Tree prufer_decode(std::span<const int> sequence, int n) {
  if (n < 1) throw std::invalid_argument("prufer_decode: n must be >= 1");
  if (n == 1) return Tree(1, {});
  if (static_cast<int>(sequence.size()) != n - 2) {
    throw std::invalid_argument("prufer_decode: code length must be n-2");
  }
  std::vector<int> deg(n, 1);
  for (int c : sequence) {
    if (c < 0 || c >= n) throw std::invalid_argument("prufer_decode: entry out of range");
    ++deg[c];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
  for (int v = 0; v < n; ++v)
    if (deg[v] == 1) leaves.push(v);
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (int c : sequence) {
    const int leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, c);
    if (--deg[c] == 1) leaves.push(c);
  }
  const int u = leaves.top();
  leaves.pop();
  const int v = leaves.top();
  edges.emplace_back(u, v);
  return Tree(n, std::move(edges));
}

TreeSequence::iterator::iterator(int n) : n_(n), code_(n > 2 ? n - 2 : 0, 0), done_(false) {
  current_ = prufer_decode(code_, n_);
}

TreeSequence::iterator& TreeSequence::iterator::operator++() {
  // Odometer increment over [0, n)^{n-2}.
  int pos = static_cast<int>(code_.size()) - 1;
  while (pos >= 0 && code_[pos] == n_ - 1) {
    code_[pos] = 0;
    --pos;
  }
  if (pos < 0) {
    done_ = true;
    return *this;
  }
  ++code_[pos];
  current_ = prufer_decode(code_, n_);
  return *this;
}

TreeSequence enumerate_trees(int n) {
  if (n < 1) throw std::invalid_argument("enumerate_trees: n must be >= 1");
  if (n > kMaxEnumeratedTreeSize) {
    throw CapExceeded("enumerate_trees: n = " + std::to_string(n) +
                      " exceeds the enumeration cap; sample trees instead");
  }
  return TreeSequence(n);
}

ForestSequence::iterator::iterator(int n) : n_(n), done_(false) {
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs_.emplace_back(a, b);
  advance_to_acyclic();
}

void ForestSequence::iterator::advance_to_acyclic() {
  const std::uint64_t limit = std::uint64_t{1} << pairs_.size();
  for (; mask_ < limit; ++mask_) {
    DisjointSets sets(n_);
    std::vector<Edge> edges;
    bool acyclic = true;
    for (std::size_t bit = 0; bit < pairs_.size() && acyclic; ++bit) {
      if (!(mask_ >> bit & 1u)) continue;
      acyclic = sets.unite(pairs_[bit].a, pairs_[bit].b);
      edges.push_back(pairs_[bit]);
    }
    if (acyclic) {
      current_ = Forest(n_, std::move(edges));
      return;
    }
  }
  done_ = true;
}

ForestSequence::iterator& ForestSequence::iterator::operator++() {
  ++mask_;
  advance_to_acyclic();
  return *this;
}

ForestSequence enumerate_forests(int n) {
  if (n < 1) throw std::invalid_argument("enumerate_forests: n must be >= 1");
  if (n > kMaxEnumeratedForestSize) {
    throw CapExceeded("enumerate_forests: n = " + std::to_string(n) + " exceeds the cap of 5");
  }
  return ForestSequence(n);
}

std::vector<int> degrees(const Forest& forest) {
  std::vector<int> deg(forest.size(), 0);
  for (const auto& e : forest.edges()) {
    ++deg[e.a];
    ++deg[e.b];
  }
  return deg;
}

std::uint64_t count_trees_with_degrees(std::span<const int> degree_sequence) {
  const int n = static_cast<int>(degree_sequence.size());
  if (n < 2) throw std::invalid_argument("degree sequence needs at least two vertices");
  long total = 0;
  for (int d : degree_sequence) {
    if (d < 1) throw std::invalid_argument("tree degrees must be >= 1");
    total += d;
  }
  if (total != 2L * n - 2) throw std::invalid_argument("tree degrees must sum to 2n-2");
  // Multinomial (n-2; d_1-1, ..., d_n-1) as a product of binomials.
  std::uint64_t count = 1;
  int remaining = n - 2;
  for (int d : degree_sequence) {
    const int k = d - 1;
    std::uint64_t binom = 1;
    for (int i = 1; i <= k; ++i) {
      // binom * (remaining - k + i) / i stays integral at every step.
      if (__builtin_mul_overflow(binom, static_cast<std::uint64_t>(remaining - k + i), &binom)) {
        throw std::overflow_error("count_trees_with_degrees overflows 64 bits");
      }
      binom /= static_cast<std::uint64_t>(i);
    }
    if (__builtin_mul_overflow(count, binom, &count)) {
      throw std::overflow_error("count_trees_with_degrees overflows 64 bits");
    }
    remaining -= k;
  }
  return count;
}

std::vector<Edge> path_edges(const Forest& forest, int i, int j) {
  const int n = forest.size();
  if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("path_edges: vertex out of range");
  if (i == j) throw std::invalid_argument("path_edges: endpoints must differ");
  auto nb = forest.adjacency();
  std::vector<int> via(n, -1);
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(i);
  seen[i] = true;
  while (!frontier.empty() && !seen[j]) {
    const int v = frontier.front();
    frontier.pop();
    for (const auto& [w, idx] : nb[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      via[w] = idx;
      frontier.push(w);
    }
  }
  if (!seen[j]) throw std::invalid_argument("path_edges: vertices lie in different components");
  std::vector<Edge> path;
  for (int v = j; v != i;) {
    const Edge& e = forest.edges()[via[v]];
    path.push_back(e);
    v = e.a == v ? e.b : e.a;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

RootedTree root_tree(const Tree& tree, int root) {
  const int n = tree.size();
  RootedTree out;
  out.parent.assign(n, -1);
  out.order.reserve(n);
  auto nb = tree.adjacency();
  std::vector<bool> seen(n, false);
  out.order.push_back(root);
  seen[root] = true;
  for (std::size_t head = 0; head < out.order.size(); ++head) {
    const int v = out.order[head];
    for (const auto& [w, idx] : nb[v]) {
      (void)idx;
      if (seen[w]) continue;
      seen[w] = true;
      out.parent[w] = v;
      out.order.push_back(w);
    }
  }
  return out;
}

}  // namespace nelson
