#pragma once

#include <Eigen/Core>

#include "manikey/errors.hpp"
#include "manikey/types.hpp"

namespace manikey {

/// Column-wise argmax keypoint estimate with its confidence.
struct KeypointPrediction {
  std::vector<int> indices;       // row of the column maximum, ties to lowest
  Eigen::VectorXf confidences;    // that maximum, per column
};

/// Gaussian radial basis image exp(-epsilon * g^2) of a geodesic field.
/// Values far from a keypoint underflow to exactly 0 in float32; that is the
/// intended localized heat-map behavior.
RbfField rbf_map(const GeodesicField& geodesic, float epsilon);

/// Elementwise RBF on a raw distance matrix.
template <typename Derived>
Eigen::MatrixXf rbf_values(const Eigen::MatrixBase<Derived>& geodesic, float epsilon) {
  if (epsilon <= 0.0f) throw InvalidParams("epsilon must be > 0");
  if (!geodesic.derived().allFinite()) throw NonFiniteInput("geodesic values");
  return (-epsilon * geodesic.derived().template cast<float>().array().square()).exp();
}

/// Per-column argmax of a predicted or ground-truth field.
template <typename Derived>
KeypointPrediction extract_keypoints(const Eigen::MatrixBase<Derived>& field) {
  const auto& values = field.derived();
  if (values.rows() < 1) throw DataError("cannot extract keypoints from an empty field");
  KeypointPrediction pred;
  pred.indices.resize(static_cast<std::size_t>(values.cols()));
  pred.confidences.resize(values.cols());
  for (Index j = 0; j < values.cols(); ++j) {
    Index best = 0;
    auto best_val = values(0, j);
    for (Index i = 1; i < values.rows(); ++i) {
      if (values(i, j) > best_val) {  // strict: ties keep the lowest index
        best_val = values(i, j);
        best = i;
      }
    }
    pred.indices[static_cast<std::size_t>(j)] = static_cast<int>(best);
    pred.confidences[j] = static_cast<float>(best_val);
  }
  return pred;
}

/// Mean squared error over all entries.
template <typename D1, typename D2>
double mse_loss(const Eigen::MatrixBase<D1>& pred, const Eigen::MatrixBase<D2>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeMismatch("mse_loss on " + std::to_string(pred.rows()) + "x" +
                        std::to_string(pred.cols()) + " vs " + std::to_string(target.rows()) +
                        "x" + std::to_string(target.cols()));
  const auto diff =
      pred.derived().template cast<double>() - target.derived().template cast<double>();
  return diff.array().square().sum() / static_cast<double>(pred.size());
}

}  // namespace manikey
