#include "manikey/cloud_ops.hpp"

#include <cmath>

#include "manikey/kdtree.hpp"

namespace manikey {

PointCloud merge_views(const MultiViewCapture& capture) {
  capture.require_valid();
  Index total = 0;
  for (const auto& v : capture.views) total += v.size();
  if (total == 0) throw EmptyCapture();

  PointCloud merged;
  merged.points.resize(total, 3);
  merged.camera_id.resize(total);
  Index row = 0;
  for (std::size_t c = 0; c < capture.views.size(); ++c) {
    const PointCloud& view = capture.views[c];
    if (view.empty()) continue;
    view.require_valid();
    const RigidTransform& ext = capture.extrinsics[c];
    for (Index i = 0; i < view.size(); ++i) {
      const Eigen::Vector3d p = view.points.row(i).cast<double>();
      merged.points.row(row) = ext.apply(p).cast<float>();
      merged.camera_id[row] = static_cast<int>(c);
      ++row;
    }
  }
  return merged;
}

std::vector<int> filter_outlier_indices(const PointCloud& cloud, const RorParams& ror,
                                        const SorParams& sor) {
  cloud.require_valid();
  if (ror.radius <= 0.0f || ror.min_neighbors < 1)
    throw InvalidParams("ROR needs radius > 0 and min_neighbors >= 1");
  if (sor.k < 1 || sor.std_ratio <= 0.0f)
    throw InvalidParams("SOR needs k >= 1 and std_ratio > 0");

  const Index n = cloud.size();
  KdTree tree(cloud.points);

  // ROR: keep points with enough neighbors inside the radius
  std::vector<int> ror_survivors;
  ror_survivors.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int count = tree.count_within(cloud.points.row(i), ror.radius, static_cast<int>(i));
    if (count >= ror.min_neighbors) ror_survivors.push_back(static_cast<int>(i));
  }
  if (ror_survivors.empty()) throw AllPointsFiltered();

  // SOR over the ROR survivors
  Eigen::MatrixX3f surv(ror_survivors.size(), 3);
  for (std::size_t i = 0; i < ror_survivors.size(); ++i)
    surv.row(i) = cloud.points.row(ror_survivors[i]);
  KdTree surv_tree(surv);

  const Index ns = surv.rows();
  const int k = std::min<int>(sor.k, static_cast<int>(ns) - 1);
  if (k < 1) return ror_survivors;  // a single survivor has no neighbor statistic

  Eigen::VectorXd mean_dist(ns);
  std::vector<int> idx;
  std::vector<float> d2;
  for (Index i = 0; i < ns; ++i) {
    surv_tree.knn(surv.row(i), k, idx, d2, static_cast<int>(i));
    double sum = 0.0;
    for (float d : d2) sum += std::sqrt(static_cast<double>(d));
    mean_dist[i] = sum / static_cast<double>(idx.size());
  }
  const double mean = mean_dist.mean();
  const double var =
      ns > 1 ? (mean_dist.array() - mean).square().sum() / static_cast<double>(ns - 1) : 0.0;
  const double threshold = mean + static_cast<double>(sor.std_ratio) * std::sqrt(var);

  std::vector<int> survivors;
  survivors.reserve(static_cast<std::size_t>(ns));
  for (Index i = 0; i < ns; ++i)
    if (mean_dist[i] <= threshold) survivors.push_back(ror_survivors[i]);
  if (survivors.empty()) throw AllPointsFiltered();
  return survivors;
}

PointCloud filter_outliers(const PointCloud& cloud, const RorParams& ror, const SorParams& sor) {
  const std::vector<int> keep = filter_outlier_indices(cloud, ror, sor);
  PointCloud out;
  out.points.resize(keep.size(), 3);
  out.camera_id.resize(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.points.row(i) = cloud.points.row(keep[i]);
    out.camera_id[i] = cloud.camera_id[keep[i]];
  }
  return out;
}

}  // namespace manikey
