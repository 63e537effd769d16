#pragma once

#include <filesystem>
#include <vector>

#include "manikey/augment.hpp"
#include "manikey/regressor.hpp"
#include "manikey/types.hpp"

namespace manikey {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 50;
  int batch_size = 4;
  int subsample_n = 1024;
  std::uint64_t seed = 0;
  AugmentationConfig augmentation;
  bool augmentation_enabled = true;

  // implementation knobs, not paper hyper-parameters
  int encoder1_width = 64;
  int encoder2_width = 128;
  int combiner_width = 128;
  int eval_subsample_n = 2048;  // per-epoch test metrics run on a fixed subsample
  int threads = 0;              // workers per minibatch, 0 = hardware

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double test_rmse_cm = 0.0;
};

struct TrainingHistory {
  std::vector<EpochStats> epochs;
};

struct TrainResult {
  RegressorParams final_params;
  RegressorParams best_params;  // lowest test loss
  int best_epoch = 0;           // 1-based
  TrainingHistory history;
};

/// SGD with momentum over shuffled minibatches; augment_sample supplies each
/// training pair when augmentation is enabled. The test set is evaluated
/// untouched every epoch. Deterministic for a given (data, config): sample
/// streams derive from (seed, epoch, sample id) regardless of batching or
/// worker count.
TrainResult train(const std::vector<AnnotatedSample>& train_set,
                  const std::vector<AnnotatedSample>& test_set, const TrainConfig& config);

/// Directory wrapper; samples must carry precomputed geodesic fields.
TrainResult train(const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& test_dir, const TrainConfig& config);

/// CSV with header epoch,train_loss,test_loss,test_rmse_cm.
void save_history_csv(const std::filesystem::path& file, const TrainingHistory& history);

}  // namespace manikey
