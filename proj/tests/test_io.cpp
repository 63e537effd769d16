#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "manikey/sample_io.hpp"
#include "testutil.hpp"

using namespace manikey;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("manikey_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

AnnotatedSample tiny_sample() {
  AnnotatedSample sample;
  sample.cloud.points.resize(4, 3);
  sample.cloud.points << 0.0f, 0.0f, 0.0f,  //
      1.0f, 0.0f, 0.0f,                     //
      0.0f, 1.5f, 0.0f,                     //
      0.25f, 0.25f, 1.0f;
  sample.cloud.camera_id.resize(4);
  sample.cloud.camera_id << 0, 0, 1, kUnknownCamera;
  sample.keypoints.indices = {0, 2};
  sample.keypoints.labels = {"a", "b"};
  sample.keypoints.positions.resize(2, 3);
  sample.keypoints.positions.row(0) = sample.cloud.points.row(0);
  sample.keypoints.positions.row(1) = sample.cloud.points.row(2);
  sample.keypoints.occluded = {false, false};
  GeodesicField field;
  field.values.resize(4, 2);
  field.values << 0.0f, 1.8027756f, 1.0f, 1.5f, 1.8027756f, 0.0f, 1.0645f, 1.3f;
  sample.geodesic = field;
  return sample;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ply: round trip is bit exact") {
  const fs::path dir = temp_dir("ply");
  Rng rng(21);
  PointCloud cloud = test::random_cloud(257, 2.0, rng);
  for (Index i = 0; i < cloud.size(); ++i) cloud.camera_id[i] = static_cast<int>(i % 17);

  write_ply(dir / "c.ply", cloud);
  const PointCloud back = read_ply(dir / "c.ply");
  CHECK(back.points == cloud.points);
  CHECK(back.camera_id == cloud.camera_id);
}

TEST_CASE("ply: malformed input names the file") {
  const fs::path dir = temp_dir("plybad");
  std::ofstream(dir / "bad.ply") << "not a ply\n";
  CHECK_THROWS_WITH_AS(read_ply(dir / "bad.ply"), doctest::Contains("bad.ply"), ParseError);
  CHECK_THROWS_AS(read_ply(dir / "missing.ply"), ParseError);
}

TEST_CASE("geodesic.bin: round trip and header checks") {
  const fs::path dir = temp_dir("geof");
  GeodesicField field;
  field.values.resize(7, 6);
  Rng rng(22);
  for (Index i = 0; i < field.values.size(); ++i)
    field.values.data()[i] = static_cast<float>(rng.uniform(0.0, 3.0));
  write_geodesic(dir / "g.bin", field);
  const GeodesicField back = read_geodesic(dir / "g.bin");
  CHECK(back.values == field.values);

  // truncate the payload: size no longer matches the header
  std::string bytes = file_bytes(dir / "g.bin");
  std::ofstream(dir / "trunc.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 5);
  CHECK_THROWS_AS(read_geodesic(dir / "trunc.bin"), ParseError);
}

TEST_CASE("sample: save/load round trip is the identity") {
  const fs::path dir = temp_dir("sample");
  const AnnotatedSample sample = tiny_sample();
  save_sample(sample, dir / "s0");
  const AnnotatedSample back = load_sample(dir / "s0");

  CHECK(back.cloud.points == sample.cloud.points);
  CHECK(back.cloud.camera_id == sample.cloud.camera_id);
  CHECK(back.keypoints.indices == sample.keypoints.indices);
  CHECK(back.keypoints.labels == sample.keypoints.labels);
  CHECK(back.keypoints.positions == sample.keypoints.positions);
  REQUIRE(back.geodesic.has_value());
  CHECK(back.geodesic->values == sample.geodesic->values);
}

TEST_CASE("sample: saving twice is byte identical") {
  const fs::path dir = temp_dir("determinism");
  const AnnotatedSample sample = tiny_sample();
  save_sample(sample, dir / "a");
  save_sample(sample, dir / "b");
  for (const char* name : {"cloud.ply", "keypoints.json", "geodesic.bin", "meta.json"})
    CHECK(file_bytes(dir / "a" / name) == file_bytes(dir / "b" / name));
}

TEST_CASE("sample: geodesic row mismatch raises ShapeMismatch") {
  const fs::path dir = temp_dir("mismatch");
  const AnnotatedSample sample = tiny_sample();
  save_sample(sample, dir / "s0");
  GeodesicField wrong;
  wrong.values.resize(3, 2);  // cloud has 4 points
  wrong.values.setZero();
  write_geodesic(dir / "s0" / "geodesic.bin", wrong);
  CHECK_THROWS_AS(load_sample(dir / "s0"), ShapeMismatch);
}

TEST_CASE("sample: missing keypoints file raises ParseError naming it") {
  const fs::path dir = temp_dir("missing");
  save_sample(tiny_sample(), dir / "s0");
  fs::remove(dir / "s0" / "keypoints.json");
  CHECK_THROWS_WITH_AS(load_sample(dir / "s0"), doctest::Contains("keypoints.json"), ParseError);
}

TEST_CASE("sample: meta round trip") {
  const fs::path dir = temp_dir("meta");
  SampleMeta meta;
  meta.rig_id = "test-rig";
  meta.seed = 1234;
  meta.epsilon = 12.5;
  save_sample(tiny_sample(), dir / "s0", meta);
  const SampleMeta back = load_sample_meta(dir / "s0");
  CHECK(back.units == "meters");
  CHECK(back.rig_id == meta.rig_id);
  CHECK(back.seed == meta.seed);
  CHECK(back.epsilon == meta.epsilon);
}

TEST_CASE("dataset: listing is sorted and loading validates") {
  const fs::path dir = temp_dir("dataset");
  const AnnotatedSample sample = tiny_sample();
  save_sample(sample, dir / "sample_0001");
  save_sample(sample, dir / "sample_0000");
  const auto dirs = list_sample_dirs(dir);
  REQUIRE(dirs.size() == 2);
  CHECK(dirs[0].filename() == "sample_0000");
  CHECK(load_dataset(dir).size() == 2);
  CHECK_THROWS_AS(load_dataset(dir / "nothing_here"), EmptyDataset);
}

// Frozen reference written once by tests/make_fixtures; guards the on-disk
// format against accidental change.
TEST_CASE("fixture: reference sample loads field by field") {
  const fs::path dir = fs::path(MANIKEY_FIXTURES) / "sample_ref";
  REQUIRE(fs::exists(dir / "cloud.ply"));
  const AnnotatedSample sample = load_sample(dir);

  REQUIRE(sample.cloud.size() == 64);
  CHECK(sample.keypoints.labels == std::vector<std::string>{"kp0", "kp1", "kp2"});
  CHECK(sample.keypoints.indices == std::vector<int>{0, 9, 33});
  CHECK(sample.cloud.points(0, 0) == 1.47664177f);
  CHECK(sample.cloud.points(63, 2) == 0.0251812264f);
  CHECK(sample.cloud.camera_id[0] == 3);
  REQUIRE(sample.geodesic.has_value());
  CHECK(sample.geodesic->values.rows() == 64);
  CHECK(sample.geodesic->values.cols() == 3);
  CHECK(sample.geodesic->values(0, 0) == 0.0f);
  CHECK(sample.geodesic->values(63, 1) == 4.85140657f);
  CHECK(load_sample_meta(dir).seed == 99);
}
