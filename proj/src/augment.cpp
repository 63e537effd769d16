#include "manikey/augment.hpp"

#include <algorithm>
#include <cmath>

#include "manikey/field_ops.hpp"

namespace manikey {

void AugmentationConfig::validate() const {
  if (calib_rot_sigma < 0 || calib_trans_sigma < 0 || scale_sigma < 0 || shear_sigma < 0)
    throw InvalidParams("augmentation sigmas must be >= 0");
  if (camera_keep_prob < 0 || camera_keep_prob > 1 || flip_prob < 0 || flip_prob > 1)
    throw InvalidParams("augmentation probabilities must be in [0, 1]");
  if (epsilon <= 0) throw InvalidParams("epsilon must be > 0");
  const int m = static_cast<int>(flip_permutation.size());
  for (int j = 0; j < m; ++j) {
    const int p = flip_permutation[j];
    if (p < 0 || p >= m)
      throw InvalidPermutation("entry " + std::to_string(p) + " out of range");
    if (flip_permutation[p] != j)
      throw InvalidPermutation("flip permutation must be an involution");
  }
}

AugmentationConfig AugmentationConfig::disabled() {
  AugmentationConfig c;
  c.calib_rot_sigma = 0.0;
  c.calib_trans_sigma = 0.0;
  c.camera_keep_prob = 1.0;
  c.scale_sigma = 0.0;
  c.flip_prob = 0.0;
  c.shear_sigma = 0.0;
  return c;
}

Eigen::Matrix4d scale_matrix(double sx, double sy, double sz) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = sx;
  m(1, 1) = sy;
  m(2, 2) = sz;
  return m;
}

Eigen::Matrix4d flip_matrix(bool flipped) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = flipped ? -1.0 : 1.0;
  return m;
}

Eigen::Matrix4d sideway_shear(double theta) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(1, 0) = std::tan(theta);
  return m;
}

Eigen::Matrix4d forward_shear(double theta) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(1, 2) = std::tan(theta);
  return m;
}

std::vector<bool> sample_camera_mask(Rng& rng, int camera_count, double keep_prob) {
  std::vector<bool> mask(static_cast<std::size_t>(camera_count));
  for (int c = 0; c < camera_count; ++c) mask[c] = rng.uniform() <= keep_prob;
  return mask;
}

AugmentationDraw sample_draw(const AugmentationConfig& config, int camera_count, Rng& rng) {
  config.validate();
  if (camera_count < 1) throw InvalidParams("camera_count must be >= 1");

  AugmentationDraw draw;
  const double sx = rng.normal(1.0, config.scale_sigma);
  const double sy = rng.normal(1.0, config.scale_sigma);
  const double sz = rng.normal(1.0, config.scale_sigma);
  draw.t_scale = scale_matrix(sx, sy, sz);

  draw.flipped = rng.uniform() < config.flip_prob;
  draw.t_flip = flip_matrix(draw.flipped);

  draw.t_sideway = sideway_shear(rng.normal(0.0, config.shear_sigma));
  draw.t_forward = forward_shear(rng.normal(0.0, config.shear_sigma));

  draw.calib_noise.resize(static_cast<std::size_t>(camera_count));
  for (int c = 0; c < camera_count; ++c) {
    const Eigen::Vector3d axis = rng.unit_vector();
    const double angle = rng.normal(0.0, config.calib_rot_sigma);
    Eigen::Vector3d t;
    for (int i = 0; i < 3; ++i) t[i] = rng.normal(0.0, config.calib_trans_sigma);
    draw.calib_noise[c] = RigidTransform::from_axis_angle(axis, angle, t);
  }

  draw.camera_mask = sample_camera_mask(rng, camera_count, config.camera_keep_prob);
  if (std::none_of(draw.camera_mask.begin(), draw.camera_mask.end(), [](bool b) { return b; }))
    draw.camera_mask[rng.uniform_int(camera_count)] = true;
  return draw;
}

namespace {

PointCloud transform_points(const PointCloud& cloud, const Eigen::Matrix3d& linear) {
  PointCloud out;
  out.camera_id = cloud.camera_id;
  out.points.resize(cloud.size(), 3);
  for (Index i = 0; i < cloud.size(); ++i)
    out.points.row(i) = (linear * cloud.points.row(i).transpose().cast<double>()).cast<float>();
  return out;
}

KeypointSet rebind_keypoints(const KeypointSet& keypoints, const PointCloud& cloud) {
  KeypointSet out = keypoints;
  for (std::size_t j = 0; j < out.indices.size(); ++j)
    out.positions.row(static_cast<Index>(j)) = cloud.points.row(out.indices[j]);
  return out;
}

}  // namespace

std::pair<PointCloud, KeypointSet> apply_geometric(const PointCloud& cloud,
                                                   const KeypointSet& keypoints,
                                                   const AugmentationDraw& draw) {
  keypoints.require_consistent_with(cloud);
  const Eigen::Matrix3d linear = draw.composed().topLeftCorner<3, 3>();
  PointCloud out = transform_points(cloud, linear);
  return {out, rebind_keypoints(keypoints, out)};
}

MultiViewCapture apply_calibration_noise(const MultiViewCapture& capture,
                                         const AugmentationDraw& draw) {
  capture.require_valid();
  if (draw.calib_noise.size() != capture.views.size())
    throw ConfigMismatch("draw has " + std::to_string(draw.calib_noise.size()) +
                         " camera noises but capture has " +
                         std::to_string(capture.views.size()) + " views");
  MultiViewCapture out = capture;
  for (std::size_t c = 0; c < out.extrinsics.size(); ++c)
    out.extrinsics[c] = out.extrinsics[c].compose(draw.calib_noise[c]);
  return out;
}

AnnotatedSample apply_dropout(const AnnotatedSample& sample, const AugmentationDraw& draw) {
  sample.require_valid();
  const int mask_size = static_cast<int>(draw.camera_mask.size());

  // points with unknown provenance are never dropped
  const auto kept = [&](Index i) {
    const int cam = sample.cloud.camera_id[i];
    if (cam == kUnknownCamera) return true;
    if (cam < 0 || cam >= mask_size)
      throw ConfigMismatch("camera_id " + std::to_string(cam) + " outside draw mask of " +
                           std::to_string(mask_size) + " cameras");
    return static_cast<bool>(draw.camera_mask[cam]);
  };

  Index n_kept = 0;
  for (Index i = 0; i < sample.cloud.size(); ++i)
    if (kept(i)) ++n_kept;
  if (n_kept == sample.cloud.size()) return sample;
  if (n_kept == 0) throw DataError("camera dropout removed every point");
  if (!sample.geodesic)
    throw DataError("camera dropout on an annotated sample requires its geodesic field");

  AnnotatedSample out;
  out.cloud.points.resize(n_kept, 3);
  out.cloud.camera_id.resize(n_kept);
  GeodesicField field;
  field.method = sample.geodesic->method;
  field.values.resize(n_kept, sample.geodesic->values.cols());

  std::vector<int> remap(static_cast<std::size_t>(sample.cloud.size()), -1);
  Index row = 0;
  for (Index i = 0; i < sample.cloud.size(); ++i) {
    if (!kept(i)) continue;
    out.cloud.points.row(row) = sample.cloud.points.row(i);
    out.cloud.camera_id[row] = sample.cloud.camera_id[i];
    field.values.row(row) = sample.geodesic->values.row(i);
    remap[static_cast<std::size_t>(i)] = static_cast<int>(row);
    ++row;
  }

  out.keypoints = sample.keypoints;
  if (out.keypoints.occluded.size() != out.keypoints.indices.size())
    out.keypoints.occluded.assign(out.keypoints.indices.size(), false);
  for (std::size_t j = 0; j < out.keypoints.indices.size(); ++j) {
    const int mapped = remap[static_cast<std::size_t>(out.keypoints.indices[j])];
    if (mapped >= 0) {
      out.keypoints.indices[j] = mapped;
    } else {
      // the keypoint's own point was dropped: snap to the closest surviving
      // point on the manifold
      Index best = 0;
      field.values.col(static_cast<Index>(j)).minCoeff(&best);
      out.keypoints.indices[j] = static_cast<int>(best);
      out.keypoints.occluded[j] =
          field.values(best, static_cast<Index>(j)) > kOcclusionSnapThreshold;
    }
    out.keypoints.positions.row(static_cast<Index>(j)) =
        out.cloud.points.row(out.keypoints.indices[j]);
  }

  out.geodesic = std::move(field);
  return out;
}

RbfField update_targets(const GeodesicField& geodesic, const PointCloud& cloud,
                        const KeypointSet& keypoints, const PointCloud& transformed_cloud,
                        const KeypointSet& transformed_keypoints, float epsilon) {
  const Index n = cloud.size();
  const Index m = static_cast<Index>(keypoints.indices.size());
  if (transformed_cloud.size() != n)
    throw ShapeMismatch("transformed cloud has " + std::to_string(transformed_cloud.size()) +
                        " points, original has " + std::to_string(n));
  if (static_cast<Index>(transformed_keypoints.indices.size()) != m)
    throw ShapeMismatch("keypoint counts differ");
  if (geodesic.values.rows() != n || geodesic.values.cols() != m)
    throw ShapeMismatch("geodesic field does not match cloud and keypoints");
  if (epsilon <= 0.0f) throw InvalidParams("epsilon must be > 0");

  Eigen::MatrixXf updated(n, m);
  for (Index j = 0; j < m; ++j) {
    const Eigen::Vector3d kp = keypoints.positions.row(j).cast<double>();
    const Eigen::Vector3d kp_star = transformed_keypoints.positions.row(j).cast<double>();
    for (Index i = 0; i < n; ++i) {
      const double before = (cloud.points.row(i).transpose().cast<double>() - kp).norm();
      const double after =
          (transformed_cloud.points.row(i).transpose().cast<double>() - kp_star).norm();
      const double g = static_cast<double>(geodesic.values(i, j)) + after - before;
      updated(i, j) = static_cast<float>(std::max(g, 0.0));
    }
  }

  RbfField field;
  field.epsilon = epsilon;
  field.values = rbf_values(updated, epsilon);
  return field;
}

Eigen::MatrixXf permute_columns(const Eigen::MatrixXf& values,
                                const std::vector<int>& permutation) {
  const Index m = values.cols();
  if (static_cast<Index>(permutation.size()) != m)
    throw InvalidPermutation("length " + std::to_string(permutation.size()) + " for " +
                             std::to_string(m) + " columns");
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (const int p : permutation) {
    if (p < 0 || p >= m) throw InvalidPermutation("entry " + std::to_string(p) + " out of range");
    if (seen[static_cast<std::size_t>(p)])
      throw InvalidPermutation("entry " + std::to_string(p) + " repeated");
    seen[static_cast<std::size_t>(p)] = true;
  }
  Eigen::MatrixXf out(values.rows(), m);
  for (Index j = 0; j < m; ++j) out.col(j) = values.col(permutation[static_cast<std::size_t>(j)]);
  return out;
}

GeodesicField flip_reindex(const GeodesicField& field, const std::vector<int>& permutation) {
  return {permute_columns(field.values, permutation), field.method};
}

RbfField flip_reindex(const RbfField& field, const std::vector<int>& permutation) {
  return {permute_columns(field.values, permutation), field.epsilon};
}

namespace {

/// Rigid jitter of each camera's point subset. With a capture the noise acts
/// in the camera frame (conjugated through the extrinsic); without one it
/// acts about the subset centroid, which keeps the lever arm of the rotation
/// at camera-subset scale.
PointCloud jitter_by_camera(const PointCloud& cloud, const AugmentationDraw& draw,
                            const MultiViewCapture* capture) {
  PointCloud out = cloud;
  const int cameras = static_cast<int>(draw.calib_noise.size());
  if (capture && capture->camera_count() != cameras)
    throw ConfigMismatch("capture camera count differs from draw");

  for (int c = 0; c < cameras; ++c) {
    std::vector<Index> rows;
    for (Index i = 0; i < cloud.size(); ++i)
      if (cloud.camera_id[i] == c) rows.push_back(i);
    if (rows.empty()) continue;

    const RigidTransform& noise = draw.calib_noise[static_cast<std::size_t>(c)];
    RigidTransform motion;
    if (capture) {
      const RigidTransform& ext = capture->extrinsics[static_cast<std::size_t>(c)];
      motion = ext.compose(noise).compose(ext.inverse());
    } else {
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (const Index i : rows) centroid += cloud.points.row(i).cast<double>();
      centroid /= static_cast<double>(rows.size());
      motion.rotation = noise.rotation;
      motion.translation = centroid - noise.rotation * centroid + noise.translation;
    }
    for (const Index i : rows)
      out.points.row(i) = motion.apply(cloud.points.row(i).cast<double>()).cast<float>();
  }
  return out;
}

}  // namespace

std::pair<PointCloud, RbfField> augment_sample(const AnnotatedSample& sample,
                                               const MultiViewCapture* capture,
                                               const AugmentationConfig& config, Rng& rng) {
  sample.require_valid();
  if (!sample.geodesic) throw DataError("augment_sample requires a precomputed geodesic field");

  int cameras = capture ? capture->camera_count() : 0;
  if (!capture) {
    for (Index i = 0; i < sample.cloud.size(); ++i) {
      const int cam = sample.cloud.camera_id[i];
      if (cam != kUnknownCamera) cameras = std::max(cameras, cam + 1);
    }
    if (cameras == 0) cameras = 1;
  }

  const AugmentationDraw draw = sample_draw(config, cameras, rng);

  const AnnotatedSample dropped = apply_dropout(sample, draw);
  const PointCloud jittered = jitter_by_camera(dropped.cloud, draw, capture);
  const KeypointSet jittered_keypoints = rebind_keypoints(dropped.keypoints, jittered);

  auto [transformed, transformed_keypoints] = apply_geometric(jittered, jittered_keypoints, draw);

  RbfField targets = update_targets(*dropped.geodesic, jittered, jittered_keypoints, transformed,
                                    transformed_keypoints, static_cast<float>(config.epsilon));
  if (draw.flipped) targets = flip_reindex(targets, config.flip_permutation);

  return {std::move(transformed), std::move(targets)};
}

}  // namespace manikey
