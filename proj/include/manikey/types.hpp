#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "manikey/errors.hpp"
#include "manikey/rigid.hpp"

namespace manikey {

using Index = Eigen::Index;

/// camera_id value for points without a known source camera.
inline constexpr int kUnknownCamera = 255;

/// Merged or per-view point cloud. Rows of `points` are xyz in meters;
/// `camera_id[i]` is the source view of row i (0..C-1 or kUnknownCamera).
struct PointCloud {
  Eigen::MatrixX3f points;
  Eigen::VectorXi camera_id;

  Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }

  static PointCloud from_points(Eigen::MatrixX3f pts, int camera = kUnknownCamera) {
    PointCloud c;
    c.camera_id = Eigen::VectorXi::Constant(pts.rows(), camera);
    c.points = std::move(pts);
    return c;
  }

  void require_valid() const {
    if (points.rows() == 0) throw DataError("point cloud is empty");
    if (!points.allFinite()) throw NonFiniteInput("point cloud coordinates");
    if (camera_id.size() != points.rows())
      throw ShapeMismatch("camera_id length " + std::to_string(camera_id.size()) +
                          " vs point count " + std::to_string(points.rows()));
  }
};

/// Raw rig output: per-camera clouds in camera-local frames plus the
/// camera-to-rig extrinsic of each view.
struct MultiViewCapture {
  std::vector<PointCloud> views;
  std::vector<RigidTransform> extrinsics;

  int camera_count() const { return static_cast<int>(views.size()); }

  void require_valid() const {
    if (views.empty()) throw DataError("capture has no views");
    if (views.size() != extrinsics.size())
      throw ShapeMismatch("views " + std::to_string(views.size()) + " vs extrinsics " +
                          std::to_string(extrinsics.size()));
    for (const auto& e : extrinsics)
      if (!e.is_valid()) throw DataError("extrinsic is not a rigid transform");
  }
};

/// Ordered semantic keypoints of a companion cloud. positions[j] is exactly
/// points[indices[j]] of that cloud.
struct KeypointSet {
  std::vector<int> indices;
  Eigen::MatrixX3f positions;
  std::vector<std::string> labels;
  std::vector<bool> occluded;  // set by camera dropout when a keypoint loses its point

  int size() const { return static_cast<int>(indices.size()); }

  void require_consistent_with(const PointCloud& cloud) const;
};

enum class GeodesicMethod { dijkstra, heat };

std::string to_string(GeodesicMethod m);
GeodesicMethod geodesic_method_from_string(const std::string& s);

/// n x m matrix of on-manifold distances (meters), one column per keypoint.
struct GeodesicField {
  Eigen::MatrixXf values;
  GeodesicMethod method = GeodesicMethod::dijkstra;
};

/// n x m matrix exp(-epsilon * g^2) in (0, 1].
struct RbfField {
  Eigen::MatrixXf values;
  float epsilon = 10.0f;
};

/// Dataset tuple {P, N, D^g}; the geodesic field is filled by precompute.
struct AnnotatedSample {
  PointCloud cloud;
  KeypointSet keypoints;
  std::optional<GeodesicField> geodesic;

  void require_valid() const;
};

/// Default keypoint count.
inline constexpr int kDefaultKeypointCount = 6;

/// Canonical ordered labels; index 0..5. The order is recorded per dataset in
/// keypoints.json (order_version 1) so it travels with the data.
const std::vector<std::string>& canonical_keypoint_labels();

/// Column permutation restoring label semantics after a lateral mirror flip.
/// Involution: swaps left/right limbs, fixes hip and neck.
std::vector<int> default_flip_permutation();

}  // namespace manikey
