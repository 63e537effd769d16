#pragma once

#include "manikey/types.hpp"

namespace manikey {

/// Concatenate the views of a capture into the rig frame. Empty views are
/// skipped; camera_id of each output point is its source view index.
PointCloud merge_views(const MultiViewCapture& capture);

struct RorParams {
  float radius = 0.1f;    // meters
  int min_neighbors = 4;  // neighbors required within radius, query excluded
};

struct SorParams {
  int k = 12;
  float std_ratio = 2.0f;
};

/// Radius outlier removal followed by statistical outlier removal.
/// SOR drops points whose mean k-NN distance exceeds mean + std_ratio * std
/// of that statistic over the ROR survivors (sample standard deviation).
PointCloud filter_outliers(const PointCloud& cloud, const RorParams& ror, const SorParams& sor);

/// Survivor row indices of the same filter, for callers that must remap
/// companion data.
std::vector<int> filter_outlier_indices(const PointCloud& cloud, const RorParams& ror,
                                        const SorParams& sor);

}  // namespace manikey
