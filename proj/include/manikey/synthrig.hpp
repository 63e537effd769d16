#pragma once

#include <filesystem>
#include <utility>

#include "manikey/cloud_ops.hpp"
#include "manikey/rng.hpp"
#include "manikey/types.hpp"

namespace manikey {

/// Procedural quadruped: ellipsoid body and head, cylinder legs and neck.
/// Axes: x lateral (+x is the animal's right), y along the spine (+y
/// forward), z up. Feet stand on z = 0.
struct QuadrupedParams {
  // body half-axes, meters
  double body_half_width = 0.35;   // x
  double body_half_length = 0.9;   // y
  double body_half_height = 0.45;  // z

  double leg_length = 0.5;  // ground to body underside, nominal
  double leg_radius = 0.07;
  double neck_length = 0.45;
  double neck_radius = 0.09;
  double head_scale = 1.0;

  double size_jitter = 0.06;    // relative sigma on dimensions, per animal
  double stance_jitter = 0.05;  // radians, leg splay sigma

  double sampling_density = 300.0;  // points per square meter

  void validate() const;
};

struct RigConfig {
  std::vector<RigidTransform> poses;  // camera-to-rig transforms, +z looks out
  double depth_noise_sigma = 0.005;   // meters, along the view ray
  double min_range = 0.05;
  double max_range = 4.0;
  double fov_half_x = 0.45;  // radians
  double fov_half_y = 0.35;

  int camera_count() const { return static_cast<int>(poses.size()); }
  void validate() const;

  /// Paper-style rig: on each side two rows of four cameras, one camera
  /// above. 17 cameras total.
  static RigConfig default_rig();
};

/// Camera-to-rig pose looking from `center` toward `target`.
RigidTransform look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up_hint = Eigen::Vector3d::UnitZ());

/// Surface-sampled quadruped with its six ground-truth keypoints (canonical
/// order), each snapped to the nearest sampled point.
std::pair<PointCloud, KeypointSet> generate_quadruped(const QuadrupedParams& params, Rng& rng);

/// Simulate the rig: per camera, points inside the frustum and facing the
/// camera (12-NN plane-fit normal against the view ray) survive and are
/// displaced along the ray by Gaussian depth noise. Views are camera-local;
/// exact extrinsics are recorded. Cameras that see nothing keep empty views.
MultiViewCapture virtual_capture(const PointCloud& shape, const RigConfig& rig, Rng& rng);

/// Outward-oriented 12-NN plane-fit normals (helper shared with tests).
Eigen::MatrixX3f estimate_normals(const PointCloud& cloud, int k = 12);

struct DatasetPipeline {
  RorParams ror;
  SorParams sor;
  int knn_k = 16;
  double t_scale = 1.0;
  GeodesicMethod method = GeodesicMethod::dijkstra;
  double epsilon = 10.0;
  // per-occasion rig assembly error: recorded extrinsics differ from the
  // true poses by one realization drawn per dataset half
  double miscalib_rot_sigma = 0.0175;
  double miscalib_trans_sigma = 0.005;
};

/// Generate out_dir/train and out_dir/test with disjoint seed streams, run
/// merge, filtering, keypoint snapping and geodesic precompute, and write
/// the sample directories. Each half gets an independent calibration-noise
/// realization, as a re-assembled rig would.
void make_dataset(const std::filesystem::path& out_dir, int n_train, int n_test,
                  const QuadrupedParams& params, const RigConfig& rig, std::uint64_t seed,
                  const DatasetPipeline& pipeline = {});

}  // namespace manikey
