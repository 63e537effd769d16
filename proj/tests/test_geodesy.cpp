#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "manikey/geodesic.hpp"
#include "manikey/graph.hpp"
#include "manikey/stats.hpp"
#include "testutil.hpp"

using namespace manikey;

namespace {

PointCloud line_cloud(const std::vector<float>& xs) {
  PointCloud cloud;
  cloud.points.resize(static_cast<Index>(xs.size()), 3);
  cloud.points.setZero();
  for (std::size_t i = 0; i < xs.size(); ++i) cloud.points(static_cast<Index>(i), 0) = xs[i];
  cloud.camera_id = Eigen::VectorXi::Constant(static_cast<Index>(xs.size()), kUnknownCamera);
  return cloud;
}

NeighborGraph graph_from_edges(int n, std::vector<GraphEdge> edges) {
  NeighborGraph g;
  g.n = n;
  g.edges = std::move(edges);
  g.finalize();
  return g;
}

}  // namespace

TEST_CASE("build_knn_graph: three collinear points with k=1") {
  const NeighborGraph g = build_knn_graph(line_cloud({0.0f, 1.0f, 2.0f}), 1);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].i == 0);
  CHECK(g.edges[0].j == 1);
  CHECK(g.edges[0].length == doctest::Approx(1.0f));
  CHECK(g.edges[1].i == 1);
  CHECK(g.edges[1].j == 2);
  CHECK(g.edges[1].length == doctest::Approx(1.0f));
  CHECK(g.bridges_added == 0);
}

TEST_CASE("build_knn_graph: k = n-1 yields the complete graph") {
  Rng rng(31);
  const NeighborGraph g = build_knn_graph(test::random_cloud(4, 1.0, rng), 3);
  CHECK(g.edges.size() == 6);
}

TEST_CASE("build_knn_graph: two far clusters are bridged by one edge") {
  Rng rng(32);
  PointCloud cloud;
  cloud.points.resize(10, 3);
  for (int i = 0; i < 5; ++i)
    cloud.points.row(i) = Eigen::RowVector3f::Random() * 0.5f;
  for (int i = 5; i < 10; ++i)
    cloud.points.row(i) = Eigen::RowVector3f::Random() * 0.5f + Eigen::RowVector3f(100, 0, 0);
  cloud.camera_id = Eigen::VectorXi::Constant(10, kUnknownCamera);

  const NeighborGraph g = build_knn_graph(cloud, 2);
  CHECK(g.bridges_added == 1);
  CHECK(g.is_connected());

  // brute-force component analysis of the unbridged edge set
  std::vector<int> comp(10);
  std::iota(comp.begin(), comp.end(), 0);
  for (const auto& e : g.edges) {
    if (e.length > 50.0f) continue;  // skip the bridge
    const int a = std::min(comp[e.i], comp[e.j]);
    for (int v = 0; v < 10; ++v)
      if (comp[v] == comp[e.i] || comp[v] == comp[e.j]) comp[v] = a;
  }
  std::set<int> roots(comp.begin(), comp.end());
  CHECK(roots.size() == 2);
}

TEST_CASE("build_knn_graph: invalid k") {
  Rng rng(33);
  const PointCloud cloud = test::random_cloud(5, 1.0, rng);
  CHECK_THROWS_AS(build_knn_graph(cloud, 5), InvalidK);
  CHECK_THROWS_AS(build_knn_graph(cloud, 0), InvalidK);
}

TEST_CASE("build_knn_graph: always symmetric and connected") {
  Rng rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 20 + rng.uniform_int(60);
    const NeighborGraph g = build_knn_graph(test::random_cloud(n, 1.0, rng), 3);
    CHECK(g.is_connected());
    for (const auto& e : g.edges) {
      CHECK(e.i < e.j);
      CHECK(e.length > 0.0f);
    }
    // CSR stores each edge from both endpoints
    CHECK(g.adj.size() == 2 * g.edges.size());
  }
}

TEST_CASE("dijkstra_field: unit path graph") {
  const NeighborGraph g = graph_from_edges(3, {{0, 1, 1.0f}, {1, 2, 1.0f}});
  const GeodesicField f = dijkstra_field(g, {0});
  CHECK(f.values(0, 0) == 0.0f);
  CHECK(f.values(1, 0) == doctest::Approx(1.0f));
  CHECK(f.values(2, 0) == doctest::Approx(2.0f));
  CHECK(f.method == GeodesicMethod::dijkstra);
}

TEST_CASE("dijkstra_field: source distance to itself is zero") {
  Rng rng(35);
  const NeighborGraph g = build_knn_graph(test::random_cloud(30, 1.0, rng), 4);
  const GeodesicField f = dijkstra_field(g, {7, 12});
  CHECK(f.values(7, 0) == 0.0f);
  CHECK(f.values(12, 1) == 0.0f);
}

TEST_CASE("dijkstra_field: unit square along edges only") {
  // corners 0-1-3-2 connected along the sides; opposite corner via two edges
  const NeighborGraph g =
      graph_from_edges(4, {{0, 1, 1.0f}, {1, 3, 1.0f}, {2, 3, 1.0f}, {0, 2, 1.0f}});
  const GeodesicField f = dijkstra_field(g, {0});
  CHECK(f.values(3, 0) == doctest::Approx(2.0f));  // not sqrt(2)
}

TEST_CASE("dijkstra_field: triangle inequality on random graphs") {
  Rng rng(36);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 15 + rng.uniform_int(25);
    const PointCloud cloud = test::random_cloud(n, 1.0, rng);
    const NeighborGraph g = build_knn_graph(cloud, 3);
    const int a = rng.uniform_int(n), b = rng.uniform_int(n), c = rng.uniform_int(n);
    const GeodesicField f = dijkstra_field(g, {a, b, c});
    for (int v = 0; v < n; ++v) {
      // d(a, v) <= d(a, b) + d(b, v) and d(a, v) <= d(a, c) + d(c, v)
      CHECK(f.values(v, 0) <= f.values(b, 0) + f.values(v, 1) + 1e-5f);
      CHECK(f.values(v, 0) <= f.values(c, 0) + f.values(v, 2) + 1e-5f);
    }
  }
}

TEST_CASE("dijkstra_field: graph distance dominates the Euclidean chord") {
  Rng rng(37);
  const PointCloud cloud = test::random_cloud(60, 1.0, rng);
  const NeighborGraph g = build_knn_graph(cloud, 4);
  const GeodesicField f = dijkstra_field(g, {0});
  for (int v = 0; v < 60; ++v) {
    const float chord = (cloud.points.row(v) - cloud.points.row(0)).norm();
    CHECK(f.values(v, 0) >= chord - 1e-5f);
  }
}

TEST_CASE("heat_field: zero at the source, nonnegative everywhere") {
  Rng rng(38);
  const PointCloud cloud = test::sphere_cloud(150, 1.0, rng);
  const NeighborGraph g = build_knn_graph(cloud, 8);
  const GeodesicField f = heat_field(g, cloud, {3, 77});
  CHECK(f.values(3, 0) == 0.0f);
  CHECK(f.values(77, 1) == 0.0f);
  CHECK((f.values.array() >= 0.0f).all());
  CHECK(f.method == GeodesicMethod::heat);
}

TEST_CASE("heat_field: matches the Dijkstra oracle on a sphere") {
  Rng rng(39);
  const PointCloud cloud = test::sphere_cloud(200, 1.0, rng);
  const NeighborGraph g = build_knn_graph(cloud, 8);
  const std::vector<int> sources = {0};
  const GeodesicField heat = heat_field(g, cloud, sources);
  const GeodesicField exact = dijkstra_field(g, sources);

  double rel_sum = 0.0;
  int count = 0;
  std::vector<double> a, b;
  for (int v = 0; v < 200; ++v) {
    a.push_back(heat.values(v, 0));
    b.push_back(exact.values(v, 0));
    if (exact.values(v, 0) < 0.1f) continue;
    rel_sum += std::abs(heat.values(v, 0) - exact.values(v, 0)) / exact.values(v, 0);
    ++count;
  }
  REQUIRE(count > 100);
  CHECK(rel_sum / count < 0.10);
  CHECK(spearman(a, b) > 0.95);
}

TEST_CASE("heat_field: monotone along a 50-point path") {
  std::vector<float> xs(50);
  std::iota(xs.begin(), xs.end(), 0.0f);
  const PointCloud cloud = line_cloud(xs);
  const NeighborGraph g = build_knn_graph(cloud, 1);
  const GeodesicField f = heat_field(g, cloud, {0});
  for (int v = 1; v < 50; ++v) CHECK(f.values(v, 0) >= f.values(v - 1, 0));
}

TEST_CASE("geodesic_field: three-point path with keypoints at both ends") {
  AnnotatedSample sample;
  sample.cloud = line_cloud({0.0f, 1.0f, 2.0f});
  sample.keypoints.indices = {0, 2};
  sample.keypoints.labels = {"a", "b"};
  sample.keypoints.positions.resize(2, 3);
  sample.keypoints.positions.row(0) = sample.cloud.points.row(0);
  sample.keypoints.positions.row(1) = sample.cloud.points.row(2);
  sample.keypoints.occluded = {false, false};

  const AnnotatedSample out = geodesic_field(sample, GeodesicMethod::dijkstra, 1);
  REQUIRE(out.geodesic.has_value());
  Eigen::MatrixXf expected(3, 2);
  expected << 0, 2, 1, 1, 2, 0;
  CHECK((out.geodesic->values - expected).cwiseAbs().maxCoeff() < 1e-6f);

  // tiny systems: the heat variant may legitimately fail to solve; when it
  // succeeds it must stay within 25% of the oracle
  try {
    const AnnotatedSample heat = geodesic_field(sample, GeodesicMethod::heat, 1);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j)
        CHECK(heat.geodesic->values(i, j) ==
              doctest::Approx(expected(i, j)).epsilon(0.25));
  } catch (const SolveFailed&) {
    // acceptable on degenerate input
  }

  // determinism
  const AnnotatedSample again = geodesic_field(sample, GeodesicMethod::dijkstra, 1);
  CHECK(again.geodesic->values == out.geodesic->values);
}

TEST_CASE("heat_field: rejects bad inputs") {
  Rng rng(40);
  const PointCloud cloud = test::random_cloud(20, 1.0, rng);
  const NeighborGraph g = build_knn_graph(cloud, 3);
  CHECK_THROWS_AS(heat_field(g, cloud, {0}, 0.0), InvalidParams);
  CHECK_THROWS_AS(heat_field(g, cloud, {99}), DataError);
  CHECK_THROWS_AS(dijkstra_field(g, {}), DataError);
}
