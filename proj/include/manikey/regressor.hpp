#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <utility>

#include "manikey/errors.hpp"
#include "manikey/rng.hpp"
#include "manikey/types.hpp"

namespace manikey {

/// Weights of the per-point encoder / global max-pool / decoder regressor.
/// Scalar is float for training speed and double for gradient verification.
template <typename Scalar>
struct RegressorParamsT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Mat enc1_w, enc1_b;  // 3 x h1, 1 x h1
  Mat enc2_w, enc2_b;  // h1 x h2, 1 x h2
  Mat comb_w, comb_b;  // 2*h2 x h3, 1 x h3
  Mat head_w, head_b;  // h3 x m, 1 x m

  int keypoint_count() const { return static_cast<int>(head_w.cols()); }

  std::array<Mat*, 8> tensors() {
    return {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &comb_w, &comb_b, &head_w, &head_b};
  }
  std::array<const Mat*, 8> tensors() const {
    return {&enc1_w, &enc1_b, &enc2_w, &enc2_b, &comb_w, &comb_b, &head_w, &head_b};
  }

  RegressorParamsT zeros_like() const {
    RegressorParamsT z;
    auto src = tensors();
    auto dst = z.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = Mat::Zero(src[i]->rows(), src[i]->cols());
    return z;
  }

  template <typename S2>
  RegressorParamsT<S2> cast() const {
    RegressorParamsT<S2> out;
    auto src = tensors();
    auto dst = out.tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<S2>();
    return out;
  }

  bool all_finite() const {
    for (const auto* t : tensors())
      if (!t->allFinite()) return false;
    return true;
  }

  /// Xavier-uniform weights, zero biases.
  static RegressorParamsT init(int m, Rng& rng, int h1 = 64, int h2 = 128, int h3 = 128) {
    if (m < 1 || h1 < 1 || h2 < 1 || h3 < 1) throw InvalidParams("layer widths must be >= 1");
    RegressorParamsT p;
    const auto fill = [&rng](Mat& w, int rows, int cols) {
      const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
      w.resize(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          w(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
    };
    fill(p.enc1_w, 3, h1);
    p.enc1_b = Mat::Zero(1, h1);
    fill(p.enc2_w, h1, h2);
    p.enc2_b = Mat::Zero(1, h2);
    fill(p.comb_w, 2 * h2, h3);
    p.comb_b = Mat::Zero(1, h3);
    fill(p.head_w, h3, m);
    p.head_b = Mat::Zero(1, m);
    return p;
  }
};

using RegressorParams = RegressorParamsT<float>;

namespace detail {

template <typename Scalar>
struct ForwardTrace {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat x;               // centered input, n x 3
  Mat a1, h1, a2, h2;  // encoder pre/post activations
  std::vector<int> pool_winner;  // winning row per pooled feature, ties to lowest
  Mat z;               // [h2 | pooled] n x 2*h2
  Mat a3, h3;          // combiner
  Mat y;               // sigmoid head output, n x m
};

template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const RegressorParamsT<Scalar>& params,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 3>& points) {
  using Mat = typename ForwardTrace<Scalar>::Mat;
  if (points.rows() < 1) throw DataError("forward needs at least one point");
  if (!points.allFinite()) throw NonFiniteInput("regressor input points");
  if (!params.all_finite()) throw NonFiniteInput("regressor parameters");

  const Eigen::Index n = points.rows();
  ForwardTrace<Scalar> t;

  // center on the centroid; double keeps the mean independent of input scale
  const Eigen::RowVector3d centroid = points.template cast<double>().colwise().mean();
  t.x = (points.template cast<double>().rowwise() - centroid).template cast<Scalar>();

  t.a1 = (t.x * params.enc1_w).rowwise() + params.enc1_b.row(0);
  t.h1 = t.a1.cwiseMax(Scalar(0));
  t.a2 = (t.h1 * params.enc2_w).rowwise() + params.enc2_b.row(0);
  t.h2 = t.a2.cwiseMax(Scalar(0));

  const Eigen::Index features = t.h2.cols();
  t.pool_winner.assign(static_cast<std::size_t>(features), 0);
  Mat pooled(1, features);
  for (Eigen::Index f = 0; f < features; ++f) {
    Eigen::Index best = 0;
    Scalar best_val = t.h2(0, f);
    for (Eigen::Index i = 1; i < n; ++i) {
      if (t.h2(i, f) > best_val) {
        best_val = t.h2(i, f);
        best = i;
      }
    }
    t.pool_winner[static_cast<std::size_t>(f)] = static_cast<int>(best);
    pooled(0, f) = best_val;
  }

  t.z.resize(n, 2 * features);
  t.z.leftCols(features) = t.h2;
  t.z.rightCols(features) = pooled.replicate(n, 1);

  t.a3 = (t.z * params.comb_w).rowwise() + params.comb_b.row(0);
  t.h3 = t.a3.cwiseMax(Scalar(0));
  Mat a4 = (t.h3 * params.head_w).rowwise() + params.head_b.row(0);
  t.y = ((-a4.array()).exp() + Scalar(1)).inverse();
  return t;
}

}  // namespace detail

/// Predict the n x m RBF field for a cloud. The centroid is subtracted
/// internally; outputs are sigmoid-squashed into (0, 1).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> forward(
    const RegressorParamsT<Scalar>& params,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 3>& points) {
  return detail::forward_trace(params, points).y;
}

/// Mean-squared-error loss and its exact gradients with respect to every
/// parameter. The max-pool routes gradient to the winning point only, ties
/// to the lowest index.
template <typename Scalar>
std::pair<double, RegressorParamsT<Scalar>> loss_and_grad(
    const RegressorParamsT<Scalar>& params,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 3>& points,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& targets) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const auto t = detail::forward_trace(params, points);
  const Eigen::Index n = t.y.rows();
  const Eigen::Index m = t.y.cols();
  if (targets.rows() != n || targets.cols() != m)
    throw ShapeMismatch("targets " + std::to_string(targets.rows()) + "x" +
                        std::to_string(targets.cols()) + " vs prediction " + std::to_string(n) +
                        "x" + std::to_string(m));

  const Mat diff = t.y - targets;
  const double loss =
      diff.template cast<double>().array().square().sum() / static_cast<double>(n * m);

  RegressorParamsT<Scalar> g;
  const Scalar norm = Scalar(2) / static_cast<Scalar>(n * m);
  const Mat d_a4 =
      (diff.array() * t.y.array() * (Scalar(1) - t.y.array())).matrix() * norm;

  g.head_w = t.h3.transpose() * d_a4;
  g.head_b = d_a4.colwise().sum();
  const Mat d_h3 = d_a4 * params.head_w.transpose();
  const Mat d_a3 = (t.a3.array() > Scalar(0)).template cast<Scalar>() * d_h3.array();

  g.comb_w = t.z.transpose() * d_a3;
  g.comb_b = d_a3.colwise().sum();
  const Mat d_z = d_a3 * params.comb_w.transpose();

  const Eigen::Index features = t.h2.cols();
  Mat d_h2 = d_z.leftCols(features);
  const Mat d_pooled = d_z.rightCols(features).colwise().sum();
  for (Eigen::Index f = 0; f < features; ++f)
    d_h2(t.pool_winner[static_cast<std::size_t>(f)], f) += d_pooled(0, f);

  const Mat d_a2 = (t.a2.array() > Scalar(0)).template cast<Scalar>() * d_h2.array();
  g.enc2_w = t.h1.transpose() * d_a2;
  g.enc2_b = d_a2.colwise().sum();
  const Mat d_h1 = d_a2 * params.enc2_w.transpose();
  const Mat d_a1 = (t.a1.array() > Scalar(0)).template cast<Scalar>() * d_h1.array();
  g.enc1_w = t.x.transpose() * d_a1;
  g.enc1_b = d_a1.colwise().sum();

  return {loss, std::move(g)};
}

/// Classical momentum: v <- momentum * v - lr * g; w <- w + v.
template <typename Scalar>
void sgd_step(RegressorParamsT<Scalar>& params, const RegressorParamsT<Scalar>& gradients,
              RegressorParamsT<Scalar>& velocity, double learning_rate, double momentum) {
  auto w = params.tensors();
  auto g = gradients.tensors();
  auto v = velocity.tensors();
  const Scalar lr = static_cast<Scalar>(learning_rate);
  const Scalar mu = static_cast<Scalar>(momentum);
  for (std::size_t i = 0; i < w.size(); ++i) {
    *v[i] = mu * *v[i] - lr * *g[i];
    *w[i] += *v[i];
  }
}

/// Uniform row subsample without replacement, identical selection for points
/// and targets. Clouds smaller than n_out are padded with repeated rows.
std::pair<Eigen::MatrixX3f, Eigen::MatrixXf> subsample(const Eigen::MatrixX3f& points,
                                                       const Eigen::MatrixXf& targets, int n_out,
                                                       Rng& rng);

/// Params file, float32 on disk regardless of the in-memory scalar.
void save_params(const std::filesystem::path& file, const RegressorParams& params);
RegressorParams load_params(const std::filesystem::path& file);

}  // namespace manikey
