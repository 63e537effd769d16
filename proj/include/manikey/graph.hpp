#pragma once

#include <utility>
#include <vector>

#include "manikey/types.hpp"

namespace manikey {

struct GraphEdge {
  int i;
  int j;  // i < j
  float length;
};

/// Undirected weighted neighborhood graph with CSR adjacency.
struct NeighborGraph {
  int n = 0;
  std::vector<GraphEdge> edges;
  int bridges_added = 0;  // inter-component edges inserted to connect the graph

  // CSR adjacency, filled by finalize()
  std::vector<int> adj_offset;
  std::vector<std::pair<int, float>> adj;  // (neighbor, edge length)

  void finalize();

  int degree(int v) const { return adj_offset[v + 1] - adj_offset[v]; }

  /// Mean edge length; 0 for an edgeless graph.
  double mean_edge_length() const;

  bool is_connected() const;
};

/// Symmetrized k-nearest-neighbor graph with Euclidean edge lengths.
/// A directed edge from either endpoint keeps the undirected edge. If the
/// result is disconnected, the shortest inter-component edge is added
/// repeatedly until connected; the count is reported in bridges_added.
NeighborGraph build_knn_graph(const PointCloud& cloud, int k);

}  // namespace manikey
