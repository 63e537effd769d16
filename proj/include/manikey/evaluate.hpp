#pragma once

#include <vector>

#include "manikey/regressor.hpp"
#include "manikey/types.hpp"

namespace manikey {

struct SampleEval {
  std::vector<int> predicted_indices;
  std::vector<double> confidences;
  std::vector<double> error_m;  // Euclidean distance to the annotated position
};

struct EvalResult {
  double rmse_cm_aggregate = 0.0;
  std::vector<double> rmse_cm_per_keypoint;
  std::vector<SampleEval> samples;
};

/// Predict on the full cloud (optionally with whole cameras removed), take
/// the column argmax, and measure Euclidean error against the annotated
/// keypoint positions. Dropping cameras never changes the ground truth.
SampleEval evaluate_sample(const RegressorParams& params, const AnnotatedSample& sample,
                           const std::vector<int>& drop_cameras = {});

EvalResult evaluate_dataset(const RegressorParams& params,
                            const std::vector<AnnotatedSample>& samples,
                            const std::vector<int>& drop_cameras = {});

}  // namespace manikey
