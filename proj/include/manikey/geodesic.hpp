#pragma once

#include "manikey/graph.hpp"
#include "manikey/types.hpp"

namespace manikey {

/// Exact shortest-path distances from each source vertex, one column per
/// source. Serves as the oracle for the heat variant.
GeodesicField dijkstra_field(const NeighborGraph& graph, const std::vector<int>& sources);

/// Graph adaptation of the heat method: short-time diffusion of a source
/// spike, unit-normalized edge gradients, and a Poisson solve of the
/// resulting divergence. t = t_scale * (mean edge length)^2.
GeodesicField heat_field(const NeighborGraph& graph, const PointCloud& cloud,
                         const std::vector<int>& sources, double t_scale = 1.0);

/// Precompute and attach the n x m field for a sample's keypoints.
AnnotatedSample geodesic_field(AnnotatedSample sample, GeodesicMethod method, int k = 16,
                               double t_scale = 1.0);

}  // namespace manikey
