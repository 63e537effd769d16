#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "manikey/cloud_ops.hpp"
#include "manikey/kdtree.hpp"
#include "manikey/rng.hpp"
#include "testutil.hpp"

using namespace manikey;

TEST_CASE("rng: same seed gives the same stream, derive gives independent ones") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  Rng c = Rng::derive(7, 1), d = Rng::derive(7, 2);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= c.uniform() != d.uniform();
  CHECK(differs);
}

TEST_CASE("rng: degenerate distributions are exact") {
  Rng rng(1);
  CHECK(rng.normal(1.0, 0.0) == 1.0);
  CHECK(rng.normal(0.0, 0.0) == 0.0);
  for (int i = 0; i < 20; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rigid: axis-angle and inverse") {
  const RigidTransform t =
      RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 2.0, {0, 0, 1});
  CHECK(t.is_valid());
  const Eigen::Vector3d p = t.apply({1, 0, 0});
  CHECK(p.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(1.0));
  CHECK(p.z() == doctest::Approx(1.0));

  const RigidTransform round = t.inverse().compose(t);
  CHECK((round.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(round.translation.norm() < 1e-14);
}

TEST_CASE("kdtree: knn and radius match brute force on random clouds") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const PointCloud cloud = test::random_cloud(200 + trial * 37, 1.0, rng);
    KdTree tree(cloud.points);
    std::vector<int> idx;
    std::vector<float> d2;
    for (int i = 0; i < 20; ++i) {
      const int q = static_cast<int>(rng.uniform_int(static_cast<int>(cloud.size())));
      tree.knn(cloud.points.row(q), 8, idx, d2, q);
      const auto expected = test::brute_knn(cloud.points, q, 8);
      REQUIRE(idx.size() == expected.size());
      for (std::size_t j = 0; j < idx.size(); ++j) CHECK(idx[j] == expected[j]);
      for (std::size_t j = 1; j < d2.size(); ++j) CHECK(d2[j - 1] <= d2[j]);

      const float r = 0.4f;
      const auto within = tree.radius(cloud.points.row(q), r, q);
      std::set<int> got(within.begin(), within.end());
      std::set<int> want;
      for (int j = 0; j < cloud.size(); ++j)
        if (j != q && (cloud.points.row(j) - cloud.points.row(q)).norm() <= r) want.insert(j);
      CHECK(got == want);
      CHECK(tree.count_within(cloud.points.row(q), r, q) == static_cast<int>(want.size()));
    }
  }
}

TEST_CASE("merge_views: identity extrinsics concatenate with provenance") {
  MultiViewCapture capture;
  Rng rng(5);
  capture.views.push_back(test::random_cloud(100, 1.0, rng));
  capture.views.push_back(test::random_cloud(150, 1.0, rng));
  capture.extrinsics.resize(2);

  const PointCloud merged = merge_views(capture);
  REQUIRE(merged.size() == 250);
  for (int i = 0; i < 100; ++i) {
    CHECK(merged.camera_id[i] == 0);
    CHECK(merged.points.row(i) == capture.views[0].points.row(i));
  }
  for (int i = 100; i < 250; ++i) CHECK(merged.camera_id[i] == 1);
}

TEST_CASE("merge_views: single view with identity extrinsic is exact") {
  MultiViewCapture capture;
  Rng rng(6);
  capture.views.push_back(test::random_cloud(40, 2.0, rng));
  capture.extrinsics.resize(1);
  const PointCloud merged = merge_views(capture);
  CHECK(merged.points == capture.views[0].points);
}

TEST_CASE("merge_views: rotation plus translation applied per view") {
  MultiViewCapture capture;
  PointCloud view;
  view.points.resize(1, 3);
  view.points << 1.0f, 0.0f, 0.0f;
  view.camera_id = Eigen::VectorXi::Zero(1);
  capture.views.push_back(view);
  capture.extrinsics.push_back(
      RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), M_PI / 2.0, {0, 0, 1}));

  const PointCloud merged = merge_views(capture);
  CHECK(merged.points(0, 0) == doctest::Approx(0.0f).epsilon(1e-6));
  CHECK(merged.points(0, 1) == doctest::Approx(1.0f));
  CHECK(merged.points(0, 2) == doctest::Approx(1.0f));
}

TEST_CASE("merge_views: empty views are skipped, all-empty capture fails") {
  MultiViewCapture capture;
  Rng rng(7);
  capture.views.push_back(PointCloud{});
  capture.views.push_back(test::random_cloud(10, 1.0, rng));
  capture.extrinsics.resize(2);
  const PointCloud merged = merge_views(capture);
  CHECK(merged.size() == 10);
  CHECK(merged.camera_id[0] == 1);  // provenance keeps the original view index

  MultiViewCapture empty;
  empty.views.resize(3);
  empty.extrinsics.resize(3);
  CHECK_THROWS_AS(merge_views(empty), EmptyCapture);
}

TEST_CASE("merge_views: output count is the sum of view counts") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    MultiViewCapture capture;
    Index total = 0;
    const int views = 1 + rng.uniform_int(5);
    for (int v = 0; v < views; ++v) {
      const int n = rng.uniform_int(50);
      if (n > 0)
        capture.views.push_back(test::random_cloud(n, 1.0, rng));
      else
        capture.views.push_back(PointCloud{});
      total += n;
      capture.extrinsics.push_back(RigidTransform::from_axis_angle(
          rng.unit_vector(), rng.normal(0.0, 0.2),
          {rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)}));
    }
    if (total == 0) continue;
    CHECK(merge_views(capture).size() == total);
  }
}

namespace {

PointCloud dense_cluster_with_far_point(Rng& rng) {
  // dense enough that every cluster point clears min_neighbors with margin
  PointCloud cloud = test::random_cloud(500, 0.3, rng);
  cloud.points.conservativeResize(501, 3);
  cloud.points.row(500) << 100.0f, 100.0f, 100.0f;
  cloud.camera_id = Eigen::VectorXi::Constant(501, kUnknownCamera);
  return cloud;
}

}  // namespace

TEST_CASE("filter_outliers: isolated far point is removed, cluster kept") {
  Rng rng(9);
  const PointCloud cloud = dense_cluster_with_far_point(rng);
  const PointCloud filtered =
      filter_outliers(cloud, {0.2f, 3}, {10, 100.0f});  // generous SOR, ROR does the work
  CHECK(filtered.size() == 500);
  for (Index i = 0; i < filtered.size(); ++i)
    CHECK(filtered.points.row(i) == cloud.points.row(i));
}

TEST_CASE("filter_outliers: no outliers and generous thresholds is a no-op") {
  Rng rng(10);
  const PointCloud cloud = test::random_cloud(200, 0.5, rng);
  const PointCloud filtered = filter_outliers(cloud, {1.0f, 1}, {5, 50.0f});
  CHECK(filtered.points == cloud.points);
  CHECK(filtered.camera_id == cloud.camera_id);
}

TEST_CASE("filter_outliers: SOR matches a brute-force recomputation") {
  // 10-point unit-spaced line plus one point offset far off it
  PointCloud cloud;
  cloud.points.resize(11, 3);
  for (int i = 0; i < 10; ++i) cloud.points.row(i) << static_cast<float>(i), 0.0f, 0.0f;
  cloud.points.row(10) << 4.0f, 50.0f, 0.0f;
  cloud.camera_id = Eigen::VectorXi::Constant(11, kUnknownCamera);

  const RorParams ror{1000.0f, 1};  // inert, isolates SOR
  const SorParams sor{3, 1.0f};
  const std::vector<int> got = filter_outlier_indices(cloud, ror, sor);

  // independent recomputation of every mean-kNN distance
  std::vector<double> mean_dist(11);
  for (int i = 0; i < 11; ++i) {
    std::vector<double> d;
    for (int j = 0; j < 11; ++j)
      if (j != i) d.push_back((cloud.points.row(i) - cloud.points.row(j)).norm());
    std::sort(d.begin(), d.end());
    mean_dist[i] = (d[0] + d[1] + d[2]) / 3.0;
  }
  double mean = 0.0;
  for (const double v : mean_dist) mean += v;
  mean /= 11.0;
  double var = 0.0;
  for (const double v : mean_dist) var += (v - mean) * (v - mean);
  var /= 10.0;
  std::vector<int> want;
  for (int i = 0; i < 11; ++i)
    if (mean_dist[i] <= mean + std::sqrt(var)) want.push_back(i);

  CHECK(got == want);
  CHECK(std::find(got.begin(), got.end(), 10) == got.end());  // offset point removed
}

TEST_CASE("filter_outliers: ROR is idempotent on the dense-cluster example") {
  Rng rng(11);
  const PointCloud cloud = dense_cluster_with_far_point(rng);
  const RorParams ror{0.2f, 3};
  const SorParams sor{10, 1000.0f};
  const PointCloud once = filter_outliers(cloud, ror, sor);
  const PointCloud twice = filter_outliers(once, ror, sor);
  CHECK(once.points == twice.points);
}

TEST_CASE("filter_outliers: survivors appear verbatim in the input") {
  Rng rng(12);
  PointCloud cloud = test::random_cloud(300, 1.0, rng);
  for (Index i = 0; i < cloud.size(); ++i) cloud.camera_id[i] = static_cast<int>(i % 7);
  const PointCloud filtered = filter_outliers(cloud, {0.5f, 2}, {5, 1.5f});
  REQUIRE(filtered.size() >= 1);
  for (Index i = 0; i < filtered.size(); ++i) {
    bool found = false;
    for (Index j = 0; j < cloud.size(); ++j) {
      if (filtered.points.row(i) == cloud.points.row(j) &&
          filtered.camera_id[i] == cloud.camera_id[j]) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("filter_outliers: everything filtered raises AllPointsFiltered") {
  PointCloud cloud;
  cloud.points.resize(2, 3);
  cloud.points << 0, 0, 0, 100, 100, 100;
  cloud.camera_id = Eigen::VectorXi::Constant(2, kUnknownCamera);
  CHECK_THROWS_AS(filter_outliers(cloud, {0.1f, 1}, {1, 1.0f}), AllPointsFiltered);
}
