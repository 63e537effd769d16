#include "manikey/sample_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace manikey {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& file, const std::string& data) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + file.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("short write to '" + file.string() + "'");
}

json parse_json_file(const fs::path& file) {
  const std::string text = read_file(file);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(file.string(), "invalid JSON");
  return j;
}

}  // namespace

void write_ply(const fs::path& file, const PointCloud& cloud) {
  cloud.require_valid();
  std::string out;
  out += "ply\n";
  out += "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\n";
  out += "property float y\n";
  out += "property float z\n";
  out += "property uchar camera_id\n";
  out += "end_header\n";
  out.reserve(out.size() + static_cast<std::size_t>(cloud.size()) * 13);
  for (Index i = 0; i < cloud.size(); ++i) {
    put_f32(out, cloud.points(i, 0));
    put_f32(out, cloud.points(i, 1));
    put_f32(out, cloud.points(i, 2));
    const int cam = cloud.camera_id[i];
    out.push_back(static_cast<char>(cam >= 0 && cam <= 255 ? cam : kUnknownCamera));
  }
  write_file(file, out);
}

PointCloud read_ply(const fs::path& file) {
  const std::string data = read_file(file);
  const std::size_t header_end = data.find("end_header\n");
  if (header_end == std::string::npos) throw ParseError(file.string(), "missing end_header");

  std::istringstream header(data.substr(0, header_end));
  std::string line;
  std::getline(header, line);
  if (line != "ply") throw ParseError(file.string(), "not a PLY file");
  std::getline(header, line);
  if (line != "format binary_little_endian 1.0")
    throw ParseError(file.string(), "expected binary little-endian PLY, got '" + line + "'");

  std::size_t n = 0;
  std::vector<std::string> props;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment") continue;
    if (tok == "element") {
      std::string name;
      ls >> name >> n;
      if (name != "vertex") throw ParseError(file.string(), "unsupported element '" + name + "'");
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(type + " " + name);
    }
  }
  const std::vector<std::string> expected = {"float x", "float y", "float z", "uchar camera_id"};
  if (props != expected) throw ParseError(file.string(), "unsupported vertex properties");

  const std::size_t body = header_end + std::string("end_header\n").size();
  const std::size_t stride = 13;  // 3 * float32 + uchar
  if (data.size() - body < n * stride)
    throw ParseError(file.string(), "truncated vertex data: expected " + std::to_string(n) +
                                        " vertices");

  PointCloud cloud;
  cloud.points.resize(static_cast<Index>(n), 3);
  cloud.camera_id.resize(static_cast<Index>(n));
  const auto* p = reinterpret_cast<const unsigned char*>(data.data()) + body;
  for (std::size_t i = 0; i < n; ++i, p += stride) {
    cloud.points(static_cast<Index>(i), 0) = get_f32(p);
    cloud.points(static_cast<Index>(i), 1) = get_f32(p + 4);
    cloud.points(static_cast<Index>(i), 2) = get_f32(p + 8);
    cloud.camera_id[static_cast<Index>(i)] = p[12];
  }
  return cloud;
}

void write_geodesic(const fs::path& file, const GeodesicField& field) {
  std::string out = "GEOF";
  put_u32(out, static_cast<std::uint32_t>(field.values.rows()));
  put_u32(out, static_cast<std::uint32_t>(field.values.cols()));
  put_u32(out, 0);  // reserved
  out.reserve(out.size() + static_cast<std::size_t>(field.values.size()) * 4);
  for (Index i = 0; i < field.values.rows(); ++i)
    for (Index j = 0; j < field.values.cols(); ++j) put_f32(out, field.values(i, j));
  write_file(file, out);
}

GeodesicField read_geodesic(const fs::path& file) {
  const std::string data = read_file(file);
  if (data.size() < 16 || data.compare(0, 4, "GEOF") != 0)
    throw ParseError(file.string(), "bad magic, expected GEOF");
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const std::uint32_t n = get_u32(p + 4);
  const std::uint32_t m = get_u32(p + 8);
  if (data.size() != 16 + static_cast<std::size_t>(n) * m * 4)
    throw ParseError(file.string(), "size does not match header " + std::to_string(n) + "x" +
                                        std::to_string(m));
  GeodesicField field;
  field.values.resize(n, m);
  p += 16;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < m; ++j, p += 4) field.values(i, j) = get_f32(p);
  return field;
}

void save_sample(const AnnotatedSample& sample, const fs::path& dir, const SampleMeta& meta) {
  sample.require_valid();
  fs::create_directories(dir);
  write_ply(dir / "cloud.ply", sample.cloud);

  json kp;
  kp["labels"] = sample.keypoints.labels;
  kp["indices"] = sample.keypoints.indices;
  kp["order_version"] = 1;
  write_file(dir / "keypoints.json", kp.dump(2) + "\n");

  json mj;
  mj["units"] = meta.units;
  mj["rig_id"] = meta.rig_id;
  mj["seed"] = meta.seed;
  mj["epsilon"] = meta.epsilon;
  write_file(dir / "meta.json", mj.dump(2) + "\n");

  if (sample.geodesic) write_geodesic(dir / "geodesic.bin", *sample.geodesic);
}

AnnotatedSample load_sample(const fs::path& dir) {
  AnnotatedSample sample;
  sample.cloud = read_ply(dir / "cloud.ply");

  const fs::path kp_file = dir / "keypoints.json";
  const json kp = parse_json_file(kp_file);
  try {
    sample.keypoints.labels = kp.at("labels").get<std::vector<std::string>>();
    sample.keypoints.indices = kp.at("indices").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ParseError(kp_file.string(), e.what());
  }
  if (sample.keypoints.labels.size() != sample.keypoints.indices.size())
    throw ParseError(kp_file.string(), "labels and indices differ in length");
  sample.keypoints.occluded.assign(sample.keypoints.indices.size(), false);
  sample.keypoints.positions.resize(static_cast<Index>(sample.keypoints.indices.size()), 3);
  for (std::size_t j = 0; j < sample.keypoints.indices.size(); ++j) {
    const int idx = sample.keypoints.indices[j];
    if (idx < 0 || idx >= sample.cloud.size())
      throw ParseError(kp_file.string(),
                       "keypoint index " + std::to_string(idx) + " out of range");
    sample.keypoints.positions.row(static_cast<Index>(j)) = sample.cloud.points.row(idx);
  }

  const fs::path geo_file = dir / "geodesic.bin";
  if (fs::exists(geo_file)) {
    GeodesicField field = read_geodesic(geo_file);
    if (field.values.rows() != sample.cloud.size())
      throw ShapeMismatch("'" + geo_file.string() + "' has " +
                          std::to_string(field.values.rows()) + " rows but cloud has " +
                          std::to_string(sample.cloud.size()) + " points");
    if (field.values.cols() != static_cast<Index>(sample.keypoints.indices.size()))
      throw ShapeMismatch("'" + geo_file.string() + "' has " +
                          std::to_string(field.values.cols()) + " columns but sample has " +
                          std::to_string(sample.keypoints.indices.size()) + " keypoints");
    sample.geodesic = std::move(field);
  }

  sample.require_valid();
  return sample;
}

SampleMeta load_sample_meta(const fs::path& dir) {
  const fs::path file = dir / "meta.json";
  const json j = parse_json_file(file);
  SampleMeta meta;
  try {
    meta.units = j.value("units", meta.units);
    meta.rig_id = j.value("rig_id", meta.rig_id);
    meta.seed = j.value("seed", meta.seed);
    meta.epsilon = j.value("epsilon", meta.epsilon);
  } catch (const json::exception& e) {
    throw ParseError(file.string(), e.what());
  }
  return meta;
}

bool sample_has_geodesic(const fs::path& dir) { return fs::exists(dir / "geodesic.bin"); }

std::vector<fs::path> list_sample_dirs(const fs::path& dataset_dir) {
  std::vector<fs::path> dirs;
  if (!fs::is_directory(dataset_dir)) throw EmptyDataset(dataset_dir.string());
  for (const auto& entry : fs::directory_iterator(dataset_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "cloud.ply"))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

std::vector<AnnotatedSample> load_dataset(const fs::path& dataset_dir) {
  const auto dirs = list_sample_dirs(dataset_dir);
  if (dirs.empty()) throw EmptyDataset(dataset_dir.string());
  std::vector<AnnotatedSample> samples;
  samples.reserve(dirs.size());
  for (const auto& d : dirs) samples.push_back(load_sample(d));
  return samples;
}

}  // namespace manikey
