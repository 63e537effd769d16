#include "manikey/config_json.hpp"

namespace manikey {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace

json to_json(const AugmentationConfig& c) {
  return {{"calib_rot_sigma", c.calib_rot_sigma},
          {"calib_trans_sigma", c.calib_trans_sigma},
          {"camera_keep_prob", c.camera_keep_prob},
          {"scale_sigma", c.scale_sigma},
          {"flip_prob", c.flip_prob},
          {"shear_sigma", c.shear_sigma},
          {"epsilon", c.epsilon},
          {"flip_permutation", c.flip_permutation}};
}

void apply_json(const json& j, AugmentationConfig& c) {
  maybe(j, "calib_rot_sigma", c.calib_rot_sigma);
  maybe(j, "calib_trans_sigma", c.calib_trans_sigma);
  maybe(j, "camera_keep_prob", c.camera_keep_prob);
  maybe(j, "scale_sigma", c.scale_sigma);
  maybe(j, "flip_prob", c.flip_prob);
  maybe(j, "shear_sigma", c.shear_sigma);
  maybe(j, "epsilon", c.epsilon);
  maybe(j, "flip_permutation", c.flip_permutation);
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"subsample_n", c.subsample_n},
          {"seed", c.seed},
          {"augmentation", to_json(c.augmentation)},
          {"augmentation_enabled", c.augmentation_enabled},
          {"encoder1_width", c.encoder1_width},
          {"encoder2_width", c.encoder2_width},
          {"combiner_width", c.combiner_width},
          {"eval_subsample_n", c.eval_subsample_n},
          {"threads", c.threads}};
}

void apply_json(const json& j, TrainConfig& c) {
  maybe(j, "learning_rate", c.learning_rate);
  maybe(j, "momentum", c.momentum);
  maybe(j, "epochs", c.epochs);
  maybe(j, "batch_size", c.batch_size);
  maybe(j, "subsample_n", c.subsample_n);
  maybe(j, "seed", c.seed);
  if (j.contains("augmentation")) apply_json(j.at("augmentation"), c.augmentation);
  maybe(j, "augmentation_enabled", c.augmentation_enabled);
  maybe(j, "encoder1_width", c.encoder1_width);
  maybe(j, "encoder2_width", c.encoder2_width);
  maybe(j, "combiner_width", c.combiner_width);
  maybe(j, "eval_subsample_n", c.eval_subsample_n);
  maybe(j, "threads", c.threads);
}

json to_json(const QuadrupedParams& p) {
  return {{"body_half_width", p.body_half_width},
          {"body_half_length", p.body_half_length},
          {"body_half_height", p.body_half_height},
          {"leg_length", p.leg_length},
          {"leg_radius", p.leg_radius},
          {"neck_length", p.neck_length},
          {"neck_radius", p.neck_radius},
          {"head_scale", p.head_scale},
          {"size_jitter", p.size_jitter},
          {"stance_jitter", p.stance_jitter},
          {"sampling_density", p.sampling_density}};
}

void apply_json(const json& j, QuadrupedParams& p) {
  maybe(j, "body_half_width", p.body_half_width);
  maybe(j, "body_half_length", p.body_half_length);
  maybe(j, "body_half_height", p.body_half_height);
  maybe(j, "leg_length", p.leg_length);
  maybe(j, "leg_radius", p.leg_radius);
  maybe(j, "neck_length", p.neck_length);
  maybe(j, "neck_radius", p.neck_radius);
  maybe(j, "head_scale", p.head_scale);
  maybe(j, "size_jitter", p.size_jitter);
  maybe(j, "stance_jitter", p.stance_jitter);
  maybe(j, "sampling_density", p.sampling_density);
}

json to_json(const RigConfig& r) {
  json poses = json::array();
  for (const auto& pose : r.poses) {
    json p;
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) p["rotation"].push_back(pose.rotation(row, col));
    for (int i = 0; i < 3; ++i) p["translation"].push_back(pose.translation[i]);
    poses.push_back(std::move(p));
  }
  return {{"poses", std::move(poses)},
          {"depth_noise_sigma", r.depth_noise_sigma},
          {"min_range", r.min_range},
          {"max_range", r.max_range},
          {"fov_half_x", r.fov_half_x},
          {"fov_half_y", r.fov_half_y}};
}

void apply_json(const json& j, RigConfig& r) {
  if (j.contains("poses")) {
    r.poses.clear();
    for (const auto& p : j.at("poses")) {
      RigidTransform pose;
      const auto rot = p.at("rotation").get<std::vector<double>>();
      const auto trans = p.at("translation").get<std::vector<double>>();
      if (rot.size() != 9 || trans.size() != 3)
        throw DataError("rig pose needs 9 rotation and 3 translation values");
      for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) pose.rotation(row, col) = rot[row * 3 + col];
      for (int i = 0; i < 3; ++i) pose.translation[i] = trans[i];
      r.poses.push_back(pose);
    }
  }
  maybe(j, "depth_noise_sigma", r.depth_noise_sigma);
  maybe(j, "min_range", r.min_range);
  maybe(j, "max_range", r.max_range);
  maybe(j, "fov_half_x", r.fov_half_x);
  maybe(j, "fov_half_y", r.fov_half_y);
}

json to_json(const DatasetPipeline& p) {
  return {{"ror_radius", p.ror.radius},
          {"ror_min_neighbors", p.ror.min_neighbors},
          {"sor_k", p.sor.k},
          {"sor_std_ratio", p.sor.std_ratio},
          {"knn_k", p.knn_k},
          {"t_scale", p.t_scale},
          {"method", to_string(p.method)},
          {"epsilon", p.epsilon},
          {"miscalib_rot_sigma", p.miscalib_rot_sigma},
          {"miscalib_trans_sigma", p.miscalib_trans_sigma}};
}

void apply_json(const json& j, DatasetPipeline& p) {
  maybe(j, "ror_radius", p.ror.radius);
  maybe(j, "ror_min_neighbors", p.ror.min_neighbors);
  maybe(j, "sor_k", p.sor.k);
  maybe(j, "sor_std_ratio", p.sor.std_ratio);
  maybe(j, "knn_k", p.knn_k);
  maybe(j, "t_scale", p.t_scale);
  if (j.contains("method")) p.method = geodesic_method_from_string(j.at("method").get<std::string>());
  maybe(j, "epsilon", p.epsilon);
  maybe(j, "miscalib_rot_sigma", p.miscalib_rot_sigma);
  maybe(j, "miscalib_trans_sigma", p.miscalib_trans_sigma);
}

}  // namespace manikey
