#include "manikey/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "manikey/kdtree.hpp"

namespace manikey {

namespace {

// Lower bound on edge length; exact duplicates (the same surface point seen
// by several cameras with zero depth noise) would otherwise produce
// zero-length edges and infinite Laplacian weights.
constexpr float kMinEdgeLength = 1e-6f;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

void NeighborGraph::finalize() {
  adj_offset.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : edges) {
    ++adj_offset[static_cast<std::size_t>(e.i) + 1];
    ++adj_offset[static_cast<std::size_t>(e.j) + 1];
  }
  for (int v = 0; v < n; ++v) adj_offset[v + 1] += adj_offset[v];
  adj.resize(edges.size() * 2);
  std::vector<int> cursor(adj_offset.begin(), adj_offset.end() - 1);
  for (const auto& e : edges) {
    adj[cursor[e.i]++] = {e.j, e.length};
    adj[cursor[e.j]++] = {e.i, e.length};
  }
}

double NeighborGraph::mean_edge_length() const {
  if (edges.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : edges) sum += e.length;
  return sum / static_cast<double>(edges.size());
}

bool NeighborGraph::is_connected() const {
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int a = adj_offset[v]; a < adj_offset[v + 1]; ++a) {
      const int w = adj[a].first;
      if (!seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == n;
}

NeighborGraph build_knn_graph(const PointCloud& cloud, int k) {
  cloud.require_valid();
  const int n = static_cast<int>(cloud.size());
  if (k < 1 || n <= k) throw InvalidK(k, n);

  KdTree tree(cloud.points);
  NeighborGraph graph;
  graph.n = n;
  graph.edges.reserve(static_cast<std::size_t>(n) * k);

  // directed kNN, symmetrized by keeping each undirected pair once
  std::vector<std::vector<int>> targets(static_cast<std::size_t>(n));
  std::vector<int> idx;
  std::vector<float> d2;
  for (int i = 0; i < n; ++i) {
    tree.knn(cloud.points.row(i), k, idx, d2, i);
    for (const int j : idx) {
      const int a = std::min(i, j);
      const int b = std::max(i, j);
      auto& row = targets[a];
      if (std::find(row.begin(), row.end(), b) == row.end()) row.push_back(b);
    }
  }
  for (int a = 0; a < n; ++a) {
    std::sort(targets[a].begin(), targets[a].end());
    for (const int b : targets[a]) {
      const float len = (cloud.points.row(a) - cloud.points.row(b)).norm();
      graph.edges.push_back({a, b, std::max(len, kMinEdgeLength)});
    }
  }

  // connect components through their closest point pair
  UnionFind uf(n);
  for (const auto& e : graph.edges) uf.unite(e.i, e.j);
  int components = 0;
  for (int v = 0; v < n; ++v)
    if (uf.find(v) == v) ++components;

  while (components > 1) {
    float best = std::numeric_limits<float>::max();
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      const int ci = uf.find(i);
      for (int j = i + 1; j < n; ++j) {
        if (uf.find(j) == ci) continue;
        const float d = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    graph.edges.push_back({bi, bj, std::max(std::sqrt(best), kMinEdgeLength)});
    ++graph.bridges_added;
    uf.unite(bi, bj);
    --components;
  }

  std::sort(graph.edges.begin(), graph.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  graph.finalize();
  return graph;
}

}  // namespace manikey
