#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "manikey/rng.hpp"
#include "manikey/types.hpp"

namespace manikey::test {

/// Uniform points on a sphere of the given radius.
inline PointCloud sphere_cloud(int n, double radius, Rng& rng) {
  PointCloud cloud;
  cloud.points.resize(n, 3);
  for (int i = 0; i < n; ++i)
    cloud.points.row(i) = (radius * rng.unit_vector()).cast<float>();
  cloud.camera_id = Eigen::VectorXi::Constant(n, kUnknownCamera);
  return cloud;
}

/// Random blob of points in a cube of the given half extent.
inline PointCloud random_cloud(int n, double half_extent, Rng& rng) {
  PointCloud cloud;
  cloud.points.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c)
      cloud.points(i, c) = static_cast<float>(rng.uniform(-half_extent, half_extent));
  cloud.camera_id = Eigen::VectorXi::Constant(n, kUnknownCamera);
  return cloud;
}

/// Brute-force k nearest neighbor indices of row i (excluding itself).
inline std::vector<int> brute_knn(const Eigen::MatrixX3f& pts, int i, int k) {
  std::vector<std::pair<float, int>> all;
  for (int j = 0; j < pts.rows(); ++j) {
    if (j == i) continue;
    all.emplace_back((pts.row(i) - pts.row(j)).squaredNorm(), j);
  }
  std::sort(all.begin(), all.end());
  std::vector<int> out;
  for (int j = 0; j < k && j < static_cast<int>(all.size()); ++j) out.push_back(all[j].second);
  return out;
}

/// One-sample Kolmogorov-Smirnov statistic against N(mean, sigma).
inline double ks_statistic_normal(std::vector<double> samples, double mean, double sigma) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double z = (samples[i] - mean) / (sigma * std::sqrt(2.0));
    const double cdf = 0.5 * (1.0 + std::erf(z));
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(cdf - lo), std::abs(cdf - hi)});
  }
  return d;
}

}  // namespace manikey::test
