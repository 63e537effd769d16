#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "manikey/rng.hpp"
#include "manikey/types.hpp"

namespace manikey {

/// Keypoints re-snapped after camera dropout are flagged occluded when the
/// nearest surviving point is farther than this on the manifold (meters).
inline constexpr float kOcclusionSnapThreshold = 0.05f;

struct AugmentationConfig {
  double calib_rot_sigma = 0.0175;   // radians, ~1 degree
  double calib_trans_sigma = 0.005;  // meters
  double camera_keep_prob = 0.95;
  double scale_sigma = 0.1;
  double flip_prob = 0.5;
  double shear_sigma = M_PI / 20.0;  // radians
  double epsilon = 10.0;
  std::vector<int> flip_permutation = {5, 4, 2, 3, 1, 0};

  void validate() const;

  /// Everything off: identity pipeline.
  static AugmentationConfig disabled();
};

/// One sampled realization of every augmentation transform.
struct AugmentationDraw {
  Eigen::Matrix4d t_scale = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d t_flip = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d t_sideway = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d t_forward = Eigen::Matrix4d::Identity();
  std::vector<RigidTransform> calib_noise;  // one per camera
  std::vector<bool> camera_mask;            // true = keep
  bool flipped = false;

  /// Composition applied to points, scale * flip * sideway * forward.
  Eigen::Matrix4d composed() const { return t_scale * t_flip * t_sideway * t_forward; }
};

Eigen::Matrix4d scale_matrix(double sx, double sy, double sz);
Eigen::Matrix4d flip_matrix(bool flipped);
/// Unit-determinant shear y += tan(theta) * x.
Eigen::Matrix4d sideway_shear(double theta);
/// Unit-determinant shear y += tan(theta) * z.
Eigen::Matrix4d forward_shear(double theta);

/// Independent per-camera keep decisions, keep when u <= keep_prob.
/// This is the raw dropout mechanism; sample_draw additionally forces one
/// camera back on when every draw came up false.
std::vector<bool> sample_camera_mask(Rng& rng, int camera_count, double keep_prob);

AugmentationDraw sample_draw(const AugmentationConfig& config, int camera_count, Rng& rng);

/// Apply the composed geometric transform to cloud and keypoints. Indices
/// and camera provenance are unchanged; the transform is a point-wise
/// bijection.
std::pair<PointCloud, KeypointSet> apply_geometric(const PointCloud& cloud,
                                                   const KeypointSet& keypoints,
                                                   const AugmentationDraw& draw);

/// Post-compose each view's extrinsic with its calibration-noise transform.
MultiViewCapture apply_calibration_noise(const MultiViewCapture& capture,
                                         const AugmentationDraw& draw);

/// Remove masked-out cameras' points and geodesic rows. Keypoints that lose
/// their point are re-snapped to the surviving point with minimal geodesic
/// value in their column and flagged occluded beyond kOcclusionSnapThreshold.
AnnotatedSample apply_dropout(const AnnotatedSample& sample, const AugmentationDraw& draw);

/// Closed-form label update after a deformation that kept point-wise
/// correspondence: the geodesic field is corrected by the change in Euclidean
/// distance, clamped at 0, and mapped through the RBF.
RbfField update_targets(const GeodesicField& geodesic, const PointCloud& cloud,
                        const KeypointSet& keypoints, const PointCloud& transformed_cloud,
                        const KeypointSet& transformed_keypoints, float epsilon);

/// Reorder field columns, restoring keypoint semantics after a mirror flip.
Eigen::MatrixXf permute_columns(const Eigen::MatrixXf& values, const std::vector<int>& permutation);
GeodesicField flip_reindex(const GeodesicField& field, const std::vector<int>& permutation);
RbfField flip_reindex(const RbfField& field, const std::vector<int>& permutation);

/// Full training-time pipeline: dropout, calibration jitter, geometric
/// transform, label update, flip re-indexing. Returns the network input
/// cloud and its regression targets. When a capture is given its extrinsics
/// define the jitter frames; otherwise each camera_id subset is jittered
/// about its own centroid.
std::pair<PointCloud, RbfField> augment_sample(const AnnotatedSample& sample,
                                               const MultiViewCapture* capture,
                                               const AugmentationConfig& config, Rng& rng);

}  // namespace manikey
