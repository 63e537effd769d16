#include "manikey/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "manikey/field_ops.hpp"

namespace manikey {

SampleEval evaluate_sample(const RegressorParams& params, const AnnotatedSample& sample,
                           const std::vector<int>& drop_cameras) {
  sample.require_valid();

  Eigen::MatrixX3f points;
  if (drop_cameras.empty()) {
    points = sample.cloud.points;
  } else {
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(sample.cloud.size()));
    for (Index i = 0; i < sample.cloud.size(); ++i) {
      const int cam = sample.cloud.camera_id[i];
      if (std::find(drop_cameras.begin(), drop_cameras.end(), cam) == drop_cameras.end())
        keep.push_back(i);
    }
    if (keep.empty()) throw DataError("dropping those cameras removes every point");
    points.resize(static_cast<Index>(keep.size()), 3);
    for (std::size_t i = 0; i < keep.size(); ++i)
      points.row(static_cast<Index>(i)) = sample.cloud.points.row(keep[i]);
  }

  const Eigen::MatrixXf pred = forward(params, points);
  const KeypointPrediction kp = extract_keypoints(pred);

  SampleEval eval;
  const std::size_t m = kp.indices.size();
  eval.predicted_indices = kp.indices;
  eval.confidences.resize(m);
  eval.error_m.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    eval.confidences[j] = static_cast<double>(kp.confidences[static_cast<Index>(j)]);
    const Eigen::Vector3f predicted = points.row(kp.indices[j]);
    const Eigen::Vector3f truth = sample.keypoints.positions.row(static_cast<Index>(j));
    eval.error_m[j] = static_cast<double>((predicted - truth).norm());
  }
  return eval;
}

EvalResult evaluate_dataset(const RegressorParams& params,
                            const std::vector<AnnotatedSample>& samples,
                            const std::vector<int>& drop_cameras) {
  if (samples.empty()) throw EmptyDataset("evaluation set");
  EvalResult result;
  result.samples.reserve(samples.size());
  const std::size_t m = samples.front().keypoints.indices.size();
  std::vector<double> sq_sum(m, 0.0);
  double total = 0.0;
  for (const auto& sample : samples) {
    if (sample.keypoints.indices.size() != m)
      throw ShapeMismatch("samples disagree on keypoint count");
    SampleEval eval = evaluate_sample(params, sample, drop_cameras);
    for (std::size_t j = 0; j < m; ++j) {
      sq_sum[j] += eval.error_m[j] * eval.error_m[j];
      total += eval.error_m[j] * eval.error_m[j];
    }
    result.samples.push_back(std::move(eval));
  }
  result.rmse_cm_per_keypoint.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    result.rmse_cm_per_keypoint[j] =
        100.0 * std::sqrt(sq_sum[j] / static_cast<double>(samples.size()));
  result.rmse_cm_aggregate =
      100.0 * std::sqrt(total / static_cast<double>(samples.size() * m));
  return result;
}

}  // namespace manikey
