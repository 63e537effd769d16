#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "manikey/field_ops.hpp"
#include "manikey/geodesic.hpp"
#include "manikey/synthrig.hpp"
#include "testutil.hpp"

using namespace manikey;

TEST_CASE("rbf_map: zero distance maps to one") {
  GeodesicField g;
  g.values.resize(1, 1);
  g.values(0, 0) = 0.0f;
  CHECK(rbf_map(g, 10.0f).values(0, 0) == 1.0f);
}

TEST_CASE("rbf_map: scalar value matches a high-precision evaluation") {
  GeodesicField g;
  g.values.resize(1, 1);
  g.values(0, 0) = 0.1f;
  // exp(-10 * 0.01) = exp(-0.1)
  CHECK(rbf_map(g, 10.0f).values(0, 0) == doctest::Approx(0.90483741803596f).epsilon(1e-6));
}

TEST_CASE("rbf_map: far distances underflow to exactly zero in float32") {
  GeodesicField g;
  g.values.resize(1, 1);
  g.values(0, 0) = 10.0f;  // exp(-1000)
  CHECK(rbf_map(g, 10.0f).values(0, 0) == 0.0f);
}

TEST_CASE("rbf_map: rejects bad inputs") {
  GeodesicField g;
  g.values.resize(1, 1);
  g.values(0, 0) = 1.0f;
  CHECK_THROWS_AS(rbf_map(g, 0.0f), InvalidParams);
  CHECK_THROWS_AS(rbf_map(g, -1.0f), InvalidParams);
  g.values(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(rbf_map(g, 10.0f), NonFiniteInput);
  g.values(0, 0) = -0.5f;
  CHECK_THROWS_AS(rbf_map(g, 10.0f), InvalidParams);
}

TEST_CASE("rbf: strictly decreasing in the distance") {
  // within the float32-representable range; beyond it both sides underflow
  // to exactly 0 (see the underflow case above)
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const float eps = static_cast<float>(rng.uniform(0.5, 20.0));
    const float g_max = std::sqrt(80.0f / eps);
    const float g2 = static_cast<float>(rng.uniform(1e-3, g_max));
    const float g1 = static_cast<float>(rng.uniform(0.0, 0.999 * g2));
    Eigen::MatrixXf m(2, 1);
    m << g1, g2;
    const Eigen::MatrixXf r = rbf_values(m, eps);
    CHECK(r(0, 0) > r(1, 0));
  }
}

TEST_CASE("extract_keypoints: ties break to the lowest index") {
  Eigen::MatrixXf field(3, 1);
  field << 0.2f, 0.9f, 0.9f;
  const KeypointPrediction pred = extract_keypoints(field);
  CHECK(pred.indices == std::vector<int>{1});
  CHECK(pred.confidences[0] == 0.9f);
}

TEST_CASE("extract_keypoints: ground-truth field recovers the annotation") {
  // the RBF of a geodesic field attains 1.0 exactly and only at keypoints
  Rng rng(52);
  QuadrupedParams params;
  params.sampling_density = 80.0;
  auto [cloud, keypoints] = generate_quadruped(params, rng);
  AnnotatedSample sample;
  sample.cloud = std::move(cloud);
  sample.keypoints = std::move(keypoints);
  sample = geodesic_field(std::move(sample), GeodesicMethod::dijkstra, 8);

  const RbfField rbf = rbf_map(*sample.geodesic, 10.0f);
  const KeypointPrediction pred = extract_keypoints(rbf.values);
  CHECK(pred.indices == sample.keypoints.indices);
  for (Index j = 0; j < pred.confidences.size(); ++j) CHECK(pred.confidences[j] == 1.0f);
}

TEST_CASE("mse_loss: examples") {
  Eigen::MatrixXf a(2, 2), b(2, 2);
  a << 0.1f, 0.2f, 0.3f, 0.4f;
  b = a;
  CHECK(mse_loss(a, b) == 0.0);

  const Eigen::MatrixXf c = a.array() + 0.1f;
  CHECK(mse_loss(c, a) == doctest::Approx(0.01).epsilon(1e-5));

  Eigen::MatrixXf p(1, 1), t(1, 1);
  p << 0.3f;
  t << 0.7f;
  CHECK(mse_loss(p, t) == doctest::Approx(0.16).epsilon(1e-6));
}

TEST_CASE("mse_loss: nonnegative, symmetric, zero iff equal") {
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXf a(4, 3), b(4, 3);
    for (Index i = 0; i < a.size(); ++i) {
      a.data()[i] = static_cast<float>(rng.uniform(0.0, 1.0));
      b.data()[i] = static_cast<float>(rng.uniform(0.0, 1.0));
    }
    const double ab = mse_loss(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == mse_loss(b, a));
    if (a != b) CHECK(ab > 0.0);
  }
}

TEST_CASE("mse_loss: shape mismatch") {
  Eigen::MatrixXf a(2, 2), b(3, 2);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(mse_loss(a, b), ShapeMismatch);
}
