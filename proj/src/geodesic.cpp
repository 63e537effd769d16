#include "manikey/geodesic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace manikey {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    m = 0.5 * (m + lower);
  }
  return m;
}

/// Per-vertex least-squares gradient over incident edges, restricted to the
/// two dominant directions of the neighborhood. Depth-camera clouds sample
/// surfaces; the残 third direction only carries curvature and noise.
Eigen::MatrixX3d surface_gradients(const NeighborGraph& graph, const PointCloud& cloud,
                                   const Eigen::VectorXd& f) {
  const int n = graph.n;
  Eigen::MatrixX3d grad(n, 3);
  for (int v = 0; v < n; ++v) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    const Eigen::Vector3d pv = cloud.points.row(v).cast<double>();
    for (int e = graph.adj_offset[v]; e < graph.adj_offset[v + 1]; ++e) {
      const auto [w, len] = graph.adj[e];
      const Eigen::Vector3d d = cloud.points.row(w).cast<double>().transpose() - pv;
      const double weight = 1.0 / (static_cast<double>(len) * len);
      a += weight * d * d.transpose();
      b += weight * d * (f[w] - f[v]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
    const double lmax = eig.eigenvalues()[2];
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    for (int d = 1; d < 3; ++d)
      if (lmax > 0.0 && eig.eigenvalues()[d] > 1e-12 * lmax)
        g += (eig.eigenvectors().col(d).dot(b) / eig.eigenvalues()[d]) *
             eig.eigenvectors().col(d);
    grad.row(v) = g.transpose();
  }
  return grad;
}

void check_sources(const NeighborGraph& graph, const std::vector<int>& sources) {
  if (sources.empty()) throw DataError("no source vertices given");
  for (const int s : sources)
    if (s < 0 || s >= graph.n)
      throw DataError("source vertex " + std::to_string(s) + " out of range for graph of " +
                      std::to_string(graph.n) + " vertices");
}

Eigen::VectorXd dijkstra_column(const NeighborGraph& graph, int source) {
  Eigen::VectorXd dist =
      Eigen::VectorXd::Constant(graph.n, std::numeric_limits<double>::infinity());
  dist[source] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (int a = graph.adj_offset[v]; a < graph.adj_offset[v + 1]; ++a) {
      const auto [w, len] = graph.adj[a];
      const double nd = d + static_cast<double>(len);
      if (nd < dist[w]) {
        dist[w] = nd;
        queue.emplace(nd, w);
      }
    }
  }
  return dist;
}

}  // namespace

GeodesicField dijkstra_field(const NeighborGraph& graph, const std::vector<int>& sources) {
  check_sources(graph, sources);
  GeodesicField field;
  field.method = GeodesicMethod::dijkstra;
  field.values.resize(graph.n, static_cast<Index>(sources.size()));
  for (std::size_t j = 0; j < sources.size(); ++j)
    field.values.col(static_cast<Index>(j)) = dijkstra_column(graph, sources[j]).cast<float>();
  return field;
}

GeodesicField heat_field(const NeighborGraph& graph, const PointCloud& cloud,
                         const std::vector<int>& sources, double t_scale) {
  check_sources(graph, sources);
  if (t_scale <= 0.0) throw InvalidParams("t_scale must be > 0");
  if (cloud.size() != graph.n)
    throw ShapeMismatch("cloud of " + std::to_string(cloud.size()) + " points vs graph of " +
                        std::to_string(graph.n) + " vertices");
  if (!graph.is_connected()) throw DataError("heat method requires a connected graph");

  const int n = graph.n;
  const double h = graph.mean_edge_length();
  const double t = t_scale * h * h;

  // L = D - W with weights 1/length; M lumps the mean incident edge length.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(graph.edges.size() * 4);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (const auto& e : graph.edges) {
    const double w = 1.0 / static_cast<double>(e.length);
    trip.emplace_back(e.i, e.j, -w);
    trip.emplace_back(e.j, e.i, -w);
    diag[e.i] += w;
    diag[e.j] += w;
    mass[e.i] += e.length;
    mass[e.j] += e.length;
  }
  for (int v = 0; v < n; ++v) {
    trip.emplace_back(v, v, diag[v]);
    mass[v] /= static_cast<double>(graph.degree(v));
  }
  Eigen::SparseMatrix<double> laplacian(n, n);
  laplacian.setFromTriplets(trip.begin(), trip.end());

  Eigen::SparseMatrix<double> heat_op = laplacian * t;
  for (int v = 0; v < n; ++v) heat_op.coeffRef(v, v) += mass[v];

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> heat_solver(heat_op);
  if (heat_solver.info() != Eigen::Success)
    throw SolveFailed("diffusion operator factorization", 0.0);

  // L has the constant nullspace; a tiny diagonal shift pins the Poisson solve.
  Eigen::SparseMatrix<double> poisson_op = laplacian;
  const double shift = 1e-9 * diag.mean();
  for (int v = 0; v < n; ++v) poisson_op.coeffRef(v, v) += shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> poisson_solver(poisson_op);
  if (poisson_solver.info() != Eigen::Success)
    throw SolveFailed("Poisson operator factorization", 0.0);

  GeodesicField field;
  field.method = GeodesicMethod::heat;
  field.values.resize(n, static_cast<Index>(sources.size()));

  for (std::size_t col = 0; col < sources.size(); ++col) {
    const int source = sources[col];
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    delta[source] = 1.0;
    const Eigen::VectorXd u = heat_solver.solve(delta);
    {
      const double residual = (heat_op * u - delta).norm();
      if (heat_solver.info() != Eigen::Success || !u.allFinite() || residual > 1e-6)
        throw SolveFailed("heat diffusion solve", residual);
    }

    // unit direction of heat decay; log keeps the fit conditioned far from
    // the source where u spans many decades
    Eigen::VectorXd log_u(n);
    for (int v = 0; v < n; ++v) log_u[v] = std::log(std::max(u[v], 1e-300));
    const Eigen::MatrixX3d grad_u = surface_gradients(graph, cloud, log_u);
    Eigen::MatrixX3d direction(n, 3);
    for (int v = 0; v < n; ++v) {
      const double norm = grad_u.row(v).norm();
      if (norm > 0.0)
        direction.row(v) = -grad_u.row(v) / norm;
      else
        direction.row(v).setZero();
    }

    // divergence of the unit field: target slope per edge is the mean of the
    // endpoint directions projected on the edge
    Eigen::VectorXd divergence = Eigen::VectorXd::Zero(n);
    for (const auto& e : graph.edges) {
      const Eigen::Vector3d d =
          (cloud.points.row(e.j) - cloud.points.row(e.i)).cast<double>().transpose() /
          static_cast<double>(e.length);
      const double x = 0.5 * (direction.row(e.i) + direction.row(e.j)).dot(d);
      divergence[e.i] -= x;
      divergence[e.j] += x;
    }

    Eigen::VectorXd phi = poisson_solver.solve(divergence);
    {
      const double residual = (poisson_op * phi - divergence).norm() /
                              std::max(1.0, divergence.norm());
      if (poisson_solver.info() != Eigen::Success || !phi.allFinite() || residual > 1e-6)
        throw SolveFailed("distance recovery solve", residual);
    }
    phi.array() -= phi[source];

    // the least-squares integration damps the non-integrable part of the
    // unit field, shrinking the scale; a graph distance has slope exactly 1
    // along each vertex's steepest-descent edge, so restore that property
    std::vector<double> descent;
    for (int v = 0; v < n; ++v) {
      if (v == source || phi[v] <= 2.0 * h) continue;
      double best = 0.0;
      for (int e = graph.adj_offset[v]; e < graph.adj_offset[v + 1]; ++e) {
        const auto [w, len] = graph.adj[e];
        best = std::max(best, (phi[v] - phi[w]) / static_cast<double>(len));
      }
      if (best > 0.0) descent.push_back(best);
    }
    const double scale = median_of(descent);
    if (scale > 1e-12) phi /= scale;

    // pinning the source pulls the field down by the near-source smoothing
    // of the spike; re-anchor on the 1-ring, where the distance is the edge
    // length itself
    std::vector<double> anchor;
    for (int e = graph.adj_offset[source]; e < graph.adj_offset[source + 1]; ++e)
      anchor.push_back(static_cast<double>(graph.adj[e].second) - phi[graph.adj[e].first]);
    phi.array() += median_of(anchor);

    field.values.col(static_cast<Index>(col)) = phi.cwiseMax(0.0).cast<float>();
    field.values(source, static_cast<Index>(col)) = 0.0f;
  }
  return field;
}

AnnotatedSample geodesic_field(AnnotatedSample sample, GeodesicMethod method, int k,
                               double t_scale) {
  sample.require_valid();
  if (sample.keypoints.size() == 0) throw DataError("sample has no keypoints");
  const NeighborGraph graph = build_knn_graph(sample.cloud, k);
  if (method == GeodesicMethod::dijkstra)
    sample.geodesic = dijkstra_field(graph, sample.keypoints.indices);
  else
    sample.geodesic = heat_field(graph, sample.cloud, sample.keypoints.indices, t_scale);
  return sample;
}

}  // namespace manikey
