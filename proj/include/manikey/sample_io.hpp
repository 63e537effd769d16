#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "manikey/types.hpp"

namespace manikey {

/// Binary little-endian PLY with vertex properties x y z (float32) and
/// camera_id (uchar).
void write_ply(const std::filesystem::path& file, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& file);

/// geodesic.bin: magic "GEOF", uint32 n, uint32 m, uint32 reserved, then
/// n x m row-major float32.
void write_geodesic(const std::filesystem::path& file, const GeodesicField& field);
GeodesicField read_geodesic(const std::filesystem::path& file);

struct SampleMeta {
  std::string units = "meters";
  std::string rig_id = "unknown";
  std::uint64_t seed = 0;
  double epsilon = 10.0;
};

/// Sample directory layout: cloud.ply, keypoints.json, meta.json and, when
/// the field is precomputed, geodesic.bin.
void save_sample(const AnnotatedSample& sample, const std::filesystem::path& dir,
                 const SampleMeta& meta = {});
AnnotatedSample load_sample(const std::filesystem::path& dir);
SampleMeta load_sample_meta(const std::filesystem::path& dir);

bool sample_has_geodesic(const std::filesystem::path& dir);

/// Sample subdirectories of a dataset directory, sorted by name.
std::vector<std::filesystem::path> list_sample_dirs(const std::filesystem::path& dataset_dir);

/// Load every sample of a dataset directory. Throws EmptyDataset when none.
std::vector<AnnotatedSample> load_dataset(const std::filesystem::path& dataset_dir);

}  // namespace manikey
