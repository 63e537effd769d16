#include "manikey/synthrig.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "manikey/geodesic.hpp"
#include "manikey/kdtree.hpp"
#include "manikey/sample_io.hpp"

namespace manikey {

namespace fs = std::filesystem;

void QuadrupedParams::validate() const {
  const double values[] = {body_half_width, body_half_length, body_half_height, leg_length,
                           leg_radius,      neck_length,      neck_radius,      head_scale,
                           sampling_density};
  for (const double v : values)
    if (!(v > 0.0)) throw InvalidParams("quadruped dimensions and density must be > 0");
  if (size_jitter < 0.0 || stance_jitter < 0.0)
    throw InvalidParams("jitter sigmas must be >= 0");
}

void RigConfig::validate() const {
  if (poses.empty()) throw InvalidParams("rig needs at least one camera");
  for (const auto& p : poses)
    if (!p.is_valid()) throw InvalidParams("camera pose is not a rigid transform");
  if (depth_noise_sigma < 0 || min_range <= 0 || max_range <= min_range)
    throw InvalidParams("rig ranges must satisfy 0 < min_range < max_range, noise >= 0");
  if (fov_half_x <= 0 || fov_half_x >= M_PI_2 || fov_half_y <= 0 || fov_half_y >= M_PI_2)
    throw InvalidParams("fov half-angles must be in (0, pi/2)");
}

RigidTransform look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& up_hint) {
  Eigen::Vector3d forward = target - center;
  if (forward.norm() < 1e-12) throw InvalidParams("look_at target equals camera center");
  forward.normalize();
  Eigen::Vector3d up = up_hint;
  if (std::abs(forward.dot(up.normalized())) > 0.999) up = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d down = forward.cross(right).normalized();
  RigidTransform pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.translation = center;
  return pose;
}

RigConfig RigConfig::default_rig() {
  RigConfig rig;
  const double side_x = 1.5;
  const double rows_z[2] = {0.45, 1.35};
  const double slots_y[4] = {-0.9, -0.3, 0.3, 0.9};
  for (const double sx : {-1.0, 1.0}) {
    for (const double z : rows_z) {
      for (const double y : slots_y) {
        // lower row looks at leg height near its slot, upper row at the body
        const Eigen::Vector3d target =
            z < 1.0 ? Eigen::Vector3d(0.0, 0.6 * y, 0.45) : Eigen::Vector3d(0.0, 0.4 * y, 0.9);
        rig.poses.push_back(look_at({sx * side_x, y, z}, target));
      }
    }
  }
  rig.poses.push_back(look_at({0.0, 0.0, 2.5}, {0.0, 0.0, 0.9}, Eigen::Vector3d::UnitY()));
  return rig;
}

namespace {

struct Ellipsoid {
  Eigen::Vector3d center;
  Eigen::Vector3d half;  // axis-aligned half-axes

  bool contains(const Eigen::Vector3d& p, double margin = 1.0) const {
    return ((p - center).array() / half.array()).matrix().squaredNorm() < margin;
  }

  double area() const {
    // Thomsen's approximation
    constexpr double p = 1.6075;
    const double a = half.x(), b = half.y(), c = half.z();
    const double s =
        (std::pow(a * b, p) + std::pow(a * c, p) + std::pow(b * c, p)) / 3.0;
    return 4.0 * M_PI * std::pow(s, 1.0 / p);
  }

  void sample(double density, Rng& rng, std::vector<Eigen::Vector3d>& out) const {
    const int count = std::max(1, static_cast<int>(std::lround(area() * density)));
    const double wmax =
        std::max({half.y() * half.z(), half.x() * half.z(), half.x() * half.y()});
    int produced = 0;
    while (produced < count) {
      const Eigen::Vector3d u = rng.unit_vector();
      const double w = std::sqrt(std::pow(half.y() * half.z() * u.x(), 2) +
                                 std::pow(half.x() * half.z() * u.y(), 2) +
                                 std::pow(half.x() * half.y() * u.z(), 2));
      if (rng.uniform() * wmax > w) continue;  // area-uniform rejection
      out.push_back(center + (half.array() * u.array()).matrix());
      ++produced;
    }
  }
};

struct Cylinder {
  Eigen::Vector3d base;
  Eigen::Vector3d tip;
  double radius;

  void sample(double density, Rng& rng, std::vector<Eigen::Vector3d>& out) const {
    const Eigen::Vector3d axis = tip - base;
    const double length = axis.norm();
    const int count =
        std::max(1, static_cast<int>(std::lround(2.0 * M_PI * radius * length * density)));
    const Eigen::Vector3d d = axis / length;
    Eigen::Vector3d e1 = d.cross(std::abs(d.z()) < 0.9 ? Eigen::Vector3d::UnitZ()
                                                       : Eigen::Vector3d::UnitX());
    e1.normalize();
    const Eigen::Vector3d e2 = d.cross(e1);
    for (int i = 0; i < count; ++i) {
      const double t = rng.uniform();
      const double a = 2.0 * M_PI * rng.uniform();
      out.push_back(base + t * axis + radius * (std::cos(a) * e1 + std::sin(a) * e2));
    }
  }
};

/// First exit of the ray p(t) = origin + t * dir from an axis-aligned ellipsoid.
Eigen::Vector3d ray_ellipsoid_exit(const Ellipsoid& e, const Eigen::Vector3d& origin,
                                   const Eigen::Vector3d& dir) {
  const Eigen::Vector3d o = (origin - e.center).array() / e.half.array();
  const Eigen::Vector3d d = dir.array() / e.half.array();
  const double a = d.squaredNorm();
  const double b = 2.0 * o.dot(d);
  const double c = o.squaredNorm() - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw InvalidParams("neck axis misses the body");
  const double t = (-b + std::sqrt(disc)) / (2.0 * a);
  return origin + t * dir;
}

}  // namespace

std::pair<PointCloud, KeypointSet> generate_quadruped(const QuadrupedParams& params, Rng& rng) {
  params.validate();

  const auto jitter = [&](double v) { return v * (1.0 + rng.normal(0.0, params.size_jitter)); };
  const double hw = jitter(params.body_half_width);
  const double hl = jitter(params.body_half_length);
  const double hh = jitter(params.body_half_height);
  const double leg_len = jitter(params.leg_length);
  const double leg_r = jitter(params.leg_radius);
  const double neck_len = jitter(params.neck_length);
  const double neck_r = jitter(params.neck_radius);

  const double body_z = leg_len + 0.55 * hh;
  const Ellipsoid body{{0.0, 0.0, body_z}, {hw, hl, hh}};

  // leg slots, canonical order: RR, RF, (hip), (neck), LF, LR
  const double lx = 0.6 * hw;
  const double ly = 0.55 * hl;
  const Eigen::Vector2d leg_xy[4] = {{lx, -ly}, {lx, ly}, {-lx, ly}, {-lx, -ly}};

  std::vector<Eigen::Vector3d> pts;
  std::vector<Eigen::Vector3d> keypoints(kDefaultKeypointCount);

  body.sample(params.sampling_density, rng, pts);

  std::vector<Cylinder> legs;
  for (int leg = 0; leg < 4; ++leg) {
    const double x = leg_xy[leg].x();
    const double y = leg_xy[leg].y();
    const double under =
        body_z - hh * std::sqrt(std::max(0.05, 1.0 - (x / hw) * (x / hw) - (y / hl) * (y / hl)));
    const Eigen::Vector3d junction(x, y, under);
    // splay: the foot swings about the fixed junction
    const double tilt_x = rng.normal(0.0, params.stance_jitter);
    const double tilt_y = rng.normal(0.0, params.stance_jitter);
    const Eigen::Vector3d foot =
        junction + under * Eigen::Vector3d(std::sin(tilt_x), std::sin(tilt_y),
                                           -std::cos(tilt_x) * std::cos(tilt_y));
    const Eigen::Vector3d embed = junction + 0.2 * (body.center - junction);
    legs.push_back({foot, embed, leg_r});

    const int kp_index = leg < 2 ? leg : (leg == 2 ? 4 : 5);  // RR RF LF LR
    keypoints[kp_index] = junction;
  }

  // hip at the rear-top surface, neck keypoint where the neck axis exits
  keypoints[2] = {0.0, -0.75 * hl, body_z + hh * std::sqrt(1.0 - 0.75 * 0.75)};

  const Eigen::Vector3d neck_dir(0.0, std::cos(M_PI / 4.0), std::sin(M_PI / 4.0));
  const Eigen::Vector3d neck_root(0.0, 0.72 * hl, body_z + 0.25 * hh);
  keypoints[3] = ray_ellipsoid_exit(body, neck_root, neck_dir);
  const Eigen::Vector3d neck_tip = keypoints[3] + neck_len * neck_dir;
  const Cylinder neck{neck_root, neck_tip, neck_r};

  const double hs = params.head_scale;
  const Ellipsoid head{neck_tip + neck_dir * 0.10 * hs, {0.11 * hs, 0.17 * hs, 0.10 * hs}};

  const std::size_t body_count = pts.size();
  for (const auto& leg : legs) leg.sample(params.sampling_density, rng, pts);
  neck.sample(params.sampling_density, rng, pts);
  const std::size_t before_head = pts.size();
  head.sample(params.sampling_density, rng, pts);

  // cull interior points where primitives interpenetrate
  std::vector<Eigen::Vector3d> surface;
  surface.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d& p = pts[i];
    const bool is_body = i < body_count;
    const bool is_head = i >= before_head;
    if (!is_body && body.contains(p, 0.98)) continue;
    if (!is_head && head.contains(p, 0.98)) continue;
    surface.push_back(p);
  }

  PointCloud cloud;
  cloud.points.resize(static_cast<Index>(surface.size()), 3);
  for (std::size_t i = 0; i < surface.size(); ++i)
    cloud.points.row(static_cast<Index>(i)) = surface[i].cast<float>();
  cloud.camera_id = Eigen::VectorXi::Constant(cloud.size(), kUnknownCamera);

  KeypointSet set;
  set.labels = canonical_keypoint_labels();
  set.indices.resize(kDefaultKeypointCount);
  set.positions.resize(kDefaultKeypointCount, 3);
  set.occluded.assign(kDefaultKeypointCount, false);
  KdTree tree(cloud.points);
  for (int j = 0; j < kDefaultKeypointCount; ++j) {
    int idx = tree.nearest(keypoints[j].cast<float>());
    int next = 2;  // rare double snap walks to the next-nearest point
    while (std::find(set.indices.begin(), set.indices.begin() + j, idx) !=
           set.indices.begin() + j) {
      std::vector<int> cand;
      std::vector<float> d2;
      tree.knn(keypoints[j].cast<float>(), next++, cand, d2);
      idx = cand.back();
    }
    set.indices[j] = idx;
    set.positions.row(j) = cloud.points.row(idx);
  }
  return {std::move(cloud), std::move(set)};
}

Eigen::MatrixX3f estimate_normals(const PointCloud& cloud, int k) {
  cloud.require_valid();
  const Index n = cloud.size();
  KdTree tree(cloud.points);
  Eigen::MatrixX3f normals(n, 3);
  std::vector<int> idx;
  std::vector<float> d2;
  for (Index i = 0; i < n; ++i) {
    tree.knn(cloud.points.row(i), std::min<int>(k, static_cast<int>(n) - 1), idx, d2,
             static_cast<int>(i));
    Eigen::Vector3d centroid = cloud.points.row(i).cast<double>();
    for (const int j : idx) centroid += cloud.points.row(j).cast<double>();
    centroid /= static_cast<double>(idx.size() + 1);

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    const Eigen::Vector3d self = cloud.points.row(i).cast<double>().transpose() - centroid;
    cov += self * self.transpose();
    for (const int j : idx) {
      const Eigen::Vector3d d = cloud.points.row(j).cast<double>().transpose() - centroid;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d normal = eig.eigenvectors().col(0);  // smallest eigenvalue
    // orient outward: away from the local neighborhood centroid
    if (normal.dot(cloud.points.row(i).cast<double>().transpose() - centroid) < 0.0)
      normal = -normal;
    normals.row(i) = normal.cast<float>();
  }
  return normals;
}

MultiViewCapture virtual_capture(const PointCloud& shape, const RigConfig& rig, Rng& rng) {
  shape.require_valid();
  rig.validate();

  const Eigen::MatrixX3f normals = estimate_normals(shape, 12);
  const double tan_x = std::tan(rig.fov_half_x);
  const double tan_y = std::tan(rig.fov_half_y);

  MultiViewCapture capture;
  capture.extrinsics = rig.poses;
  capture.views.resize(rig.poses.size());

  for (std::size_t c = 0; c < rig.poses.size(); ++c) {
    const RigidTransform& pose = rig.poses[c];
    const RigidTransform to_cam = pose.inverse();
    std::vector<Eigen::Vector3f> seen;
    for (Index i = 0; i < shape.size(); ++i) {
      const Eigen::Vector3d p = shape.points.row(i).cast<double>();
      const Eigen::Vector3d q = to_cam.apply(p);
      if (q.z() < rig.min_range || q.z() > rig.max_range) continue;
      if (std::abs(q.x()) > tan_x * q.z() || std::abs(q.y()) > tan_y * q.z()) continue;
      const Eigen::Vector3d to_camera = pose.translation - p;
      if (normals.row(i).cast<double>().dot(to_camera) <= 0.0) continue;  // back side
      // depth noise displaces strictly along the view ray
      const Eigen::Vector3d ray = q / q.norm();
      const Eigen::Vector3d noisy =
          q + (rig.depth_noise_sigma > 0.0 ? rng.normal(0.0, rig.depth_noise_sigma) : 0.0) * ray;
      seen.push_back(noisy.cast<float>());
    }
    PointCloud& view = capture.views[c];
    view.points.resize(static_cast<Index>(seen.size()), 3);
    for (std::size_t i = 0; i < seen.size(); ++i)
      view.points.row(static_cast<Index>(i)) = seen[i];
    view.camera_id = Eigen::VectorXi::Constant(view.size(), static_cast<int>(c));
  }
  return capture;
}

void make_dataset(const fs::path& out_dir, int n_train, int n_test,
                  const QuadrupedParams& params, const RigConfig& rig, std::uint64_t seed,
                  const DatasetPipeline& pipeline) {
  params.validate();
  rig.validate();
  if (n_train < 0 || n_test < 0 || n_train + n_test == 0)
    throw InvalidParams("dataset needs a positive sample count");

  const auto make_split = [&](const std::string& name, int count, std::uint64_t stream) {
    if (count == 0) return;
    const fs::path split_dir = out_dir / name;
    fs::create_directories(split_dir);

    // one rig-assembly error per occasion
    Rng rig_rng = Rng::derive(seed, stream, 0xCA11B);
    std::vector<RigidTransform> miscalib(rig.poses.size());
    for (auto& t : miscalib) {
      const Eigen::Vector3d axis = rig_rng.unit_vector();
      const double angle = rig_rng.normal(0.0, pipeline.miscalib_rot_sigma);
      Eigen::Vector3d trans;
      for (int i = 0; i < 3; ++i) trans[i] = rig_rng.normal(0.0, pipeline.miscalib_trans_sigma);
      t = RigidTransform::from_axis_angle(axis, angle, trans);
    }

    for (int s = 0; s < count; ++s) {
      Rng rng = Rng::derive(seed, stream, static_cast<std::uint64_t>(s) + 1);
      auto [shape, true_keypoints] = generate_quadruped(params, rng);
      MultiViewCapture capture = virtual_capture(shape, rig, rng);
      for (std::size_t c = 0; c < capture.extrinsics.size(); ++c)
        capture.extrinsics[c] = capture.extrinsics[c].compose(miscalib[c]);

      PointCloud merged = merge_views(capture);
      PointCloud filtered = filter_outliers(merged, pipeline.ror, pipeline.sor);

      AnnotatedSample sample;
      sample.cloud = std::move(filtered);
      sample.keypoints.labels = true_keypoints.labels;
      sample.keypoints.indices.resize(true_keypoints.size());
      sample.keypoints.positions.resize(true_keypoints.size(), 3);
      sample.keypoints.occluded.assign(true_keypoints.size(), false);
      KdTree tree(sample.cloud.points);
      for (int j = 0; j < true_keypoints.size(); ++j) {
        int idx = tree.nearest(true_keypoints.positions.row(j));
        int next = 2;
        while (std::find(sample.keypoints.indices.begin(), sample.keypoints.indices.begin() + j,
                         idx) != sample.keypoints.indices.begin() + j) {
          std::vector<int> cand;
          std::vector<float> d2;
          tree.knn(true_keypoints.positions.row(j), next++, cand, d2);
          idx = cand.back();
        }
        sample.keypoints.indices[j] = idx;
        sample.keypoints.positions.row(j) = sample.cloud.points.row(idx);
      }

      sample = geodesic_field(std::move(sample), pipeline.method, pipeline.knn_k,
                              pipeline.t_scale);

      SampleMeta meta;
      meta.rig_id = "synthetic-rig-" + std::to_string(rig.camera_count()) + "cam/" + name;
      meta.seed = seed;
      meta.epsilon = pipeline.epsilon;
      char dirname[32];
      std::snprintf(dirname, sizeof(dirname), "sample_%04d", s);
      save_sample(sample, split_dir / dirname, meta);
    }
  };

  make_split("train", n_train, 1);
  make_split("test", n_test, 2);
}

}  // namespace manikey
