#include "manikey/train.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "manikey/field_ops.hpp"
#include "manikey/sample_io.hpp"

namespace manikey {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw InvalidParams("learning_rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) throw InvalidParams("momentum must be in [0, 1)");
  if (epochs < 1 || batch_size < 1) throw InvalidParams("epochs and batch_size must be >= 1");
  if (subsample_n < 1 || eval_subsample_n < 1)
    throw InvalidParams("subsample sizes must be >= 1");
  if (encoder1_width < 1 || encoder2_width < 1 || combiner_width < 1)
    throw InvalidParams("layer widths must be >= 1");
  augmentation.validate();
}

namespace {

struct EvalSet {
  // fixed per-run subsamples of the test clouds
  std::vector<Eigen::MatrixX3f> points;
  std::vector<Eigen::MatrixXf> targets;
  std::vector<Eigen::MatrixX3f> keypoint_positions;  // ground truth, meters
};

EvalSet prepare_eval_set(const std::vector<AnnotatedSample>& test_set,
                         const TrainConfig& config) {
  EvalSet eval;
  eval.points.reserve(test_set.size());
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const AnnotatedSample& sample = test_set[i];
    const Eigen::MatrixXf targets =
        rbf_map(*sample.geodesic, static_cast<float>(config.augmentation.epsilon)).values;
    Rng rng = Rng::derive(config.seed, 0xE7A1, i);
    auto [pts, tgt] = subsample(sample.cloud.points, targets,
                                std::min<int>(config.eval_subsample_n,
                                              static_cast<int>(sample.cloud.size())),
                                rng);
    eval.points.push_back(std::move(pts));
    eval.targets.push_back(std::move(tgt));
    eval.keypoint_positions.push_back(sample.keypoints.positions);
  }
  return eval;
}

std::pair<double, double> evaluate_epoch(const RegressorParams& params, const EvalSet& eval) {
  double loss_sum = 0.0;
  double sq_err_sum = 0.0;
  std::size_t sq_err_count = 0;
  for (std::size_t i = 0; i < eval.points.size(); ++i) {
    const Eigen::MatrixXf pred = forward(params, eval.points[i]);
    loss_sum += mse_loss(pred, eval.targets[i]);
    const KeypointPrediction kp = extract_keypoints(pred);
    for (std::size_t j = 0; j < kp.indices.size(); ++j) {
      const Eigen::Vector3f predicted = eval.points[i].row(kp.indices[j]);
      const Eigen::Vector3f truth = eval.keypoint_positions[i].row(static_cast<Index>(j));
      sq_err_sum += static_cast<double>((predicted - truth).squaredNorm());
      ++sq_err_count;
    }
  }
  const double loss = loss_sum / static_cast<double>(eval.points.size());
  const double rmse_cm =
      100.0 * std::sqrt(sq_err_sum / static_cast<double>(sq_err_count));
  return {loss, rmse_cm};
}

struct StepData {
  Eigen::MatrixX3f points;
  Eigen::MatrixXf targets;
};

StepData make_step_data(const AnnotatedSample& sample, const TrainConfig& config, int epoch,
                        std::size_t sample_id) {
  Rng rng = Rng::derive(config.seed, static_cast<std::uint64_t>(epoch), sample_id + 1);
  StepData step;
  if (config.augmentation_enabled) {
    auto [cloud, targets] = augment_sample(sample, nullptr, config.augmentation, rng);
    auto [pts, tgt] = subsample(cloud.points, targets.values, config.subsample_n, rng);
    step.points = std::move(pts);
    step.targets = std::move(tgt);
  } else {
    const Eigen::MatrixXf targets =
        rbf_map(*sample.geodesic, static_cast<float>(config.augmentation.epsilon)).values;
    auto [pts, tgt] = subsample(sample.cloud.points, targets, config.subsample_n, rng);
    step.points = std::move(pts);
    step.targets = std::move(tgt);
  }
  return step;
}

}  // namespace

TrainResult train(const std::vector<AnnotatedSample>& train_set,
                  const std::vector<AnnotatedSample>& test_set, const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw EmptyDataset("train split");
  if (test_set.empty()) throw EmptyDataset("test split");
  for (const auto& s : train_set)
    if (!s.geodesic) throw DataError("training sample lacks a geodesic field; run precompute");
  for (const auto& s : test_set)
    if (!s.geodesic) throw DataError("test sample lacks a geodesic field; run precompute");
  const int m = test_set.front().keypoints.size();
  if (config.subsample_n < m) throw InvalidParams("subsample_n must be >= keypoint count");

  Rng init_rng = Rng::derive(config.seed, 0x1217, 0);
  RegressorParams params =
      RegressorParams::init(m, init_rng, config.encoder1_width, config.encoder2_width,
                            config.combiner_width);
  RegressorParams velocity = params.zeros_like();

  const EvalSet eval = prepare_eval_set(test_set, config);

  const int workers = config.threads > 0
                          ? config.threads
                          : std::max(1u, std::thread::hardware_concurrency());

  TrainResult result;
  result.best_epoch = 0;
  double best_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = Rng::derive(config.seed, 0x5FF1E, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);

    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::size_t count = end - begin;

      std::vector<double> losses(count, 0.0);
      std::vector<RegressorParams> grads(count);
      const auto work = [&](std::size_t slot) {
        const std::size_t sample_id = order[begin + slot];
        const StepData step = make_step_data(train_set[sample_id], config, epoch, sample_id);
        auto [loss, grad] = loss_and_grad(params, step.points, step.targets);
        losses[slot] = loss;
        grads[slot] = std::move(grad);
      };
      if (workers > 1 && count > 1) {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> cursor{0};
        const auto run = [&] {
          for (std::size_t slot = cursor.fetch_add(1); slot < count;
               slot = cursor.fetch_add(1))
            work(slot);
        };
        for (int w = 1; w < std::min<int>(workers, static_cast<int>(count)); ++w)
          pool.emplace_back(run);
        run();
        for (auto& t : pool) t.join();
      } else {
        for (std::size_t slot = 0; slot < count; ++slot) work(slot);
      }

      // fixed-order reduction keeps results independent of the worker count
      RegressorParams grad = std::move(grads[0]);
      double batch_loss = losses[0];
      for (std::size_t slot = 1; slot < count; ++slot) {
        auto dst = grad.tensors();
        auto src = grads[slot].tensors();
        for (std::size_t t = 0; t < dst.size(); ++t) *dst[t] += *src[t];
        batch_loss += losses[slot];
      }
      const float inv = 1.0f / static_cast<float>(count);
      for (auto* t : grad.tensors()) *t *= inv;
      batch_loss /= static_cast<double>(count);

      sgd_step(params, grad, velocity, config.learning_rate, config.momentum);
      epoch_loss += batch_loss;
      ++steps;
    }

    const auto [test_loss, test_rmse_cm] = evaluate_epoch(params, eval);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(steps);
    stats.test_loss = test_loss;
    stats.test_rmse_cm = test_rmse_cm;
    result.history.epochs.push_back(stats);

    if (test_loss < best_loss) {
      best_loss = test_loss;
      result.best_params = params;
      result.best_epoch = epoch;
    }
  }

  result.final_params = std::move(params);
  if (result.best_epoch == 0) {
    result.best_params = result.final_params;
    result.best_epoch = config.epochs;
  }
  return result;
}

TrainResult train(const std::filesystem::path& dataset_dir,
                  const std::filesystem::path& test_dir, const TrainConfig& config) {
  return train(load_dataset(dataset_dir), load_dataset(test_dir), config);
}

void save_history_csv(const std::filesystem::path& file, const TrainingHistory& history) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + file.string() + "'");
  out << "epoch,train_loss,test_loss,test_rmse_cm\n";
  char line[160];
  for (const auto& e : history.epochs) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g\n", e.epoch, e.train_loss, e.test_loss,
                  e.test_rmse_cm);
    out << line;
  }
  if (!out) throw DataError("short write to '" + file.string() + "'");
}

}  // namespace manikey
