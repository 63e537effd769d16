#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "manikey/config_json.hpp"
#include "manikey/evaluate.hpp"
#include "manikey/field_ops.hpp"
#include "manikey/geodesic.hpp"
#include "manikey/sample_io.hpp"
#include "manikey/stats.hpp"
#include "manikey/synthrig.hpp"
#include "manikey/train.hpp"

namespace manikey::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path, "invalid JSON");
  return j;
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + file.string() + "'");
  out << text;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Sample directories of either a split directory or a dataset root with
/// train/ and test/ halves.
std::vector<fs::path> find_sample_dirs(const fs::path& data) {
  std::vector<fs::path> dirs = list_sample_dirs(data);
  if (dirs.empty()) {
    for (const char* split : {"train", "test"}) {
      if (fs::is_directory(data / split)) {
        auto sub = list_sample_dirs(data / split);
        dirs.insert(dirs.end(), sub.begin(), sub.end());
      }
    }
  }
  if (dirs.empty()) throw EmptyDataset(data.string());
  return dirs;
}

// ---------------------------------------------------------------- synth --

struct SynthState {
  std::string out;
  std::string config_path;
  int n_train = 60;
  int n_test = 20;
  std::uint64_t seed = 0;
};

void run_synth(const SynthState& state) {
  const json cfg = load_config_file(state.config_path);
  QuadrupedParams quad;
  RigConfig rig = RigConfig::default_rig();
  DatasetPipeline pipeline;
  if (cfg.contains("quadruped")) apply_json(cfg.at("quadruped"), quad);
  if (cfg.contains("rig")) apply_json(cfg.at("rig"), rig);
  if (cfg.contains("pipeline")) apply_json(cfg.at("pipeline"), pipeline);

  make_dataset(state.out, state.n_train, state.n_test, quad, rig, state.seed, pipeline);
  std::cout << "wrote " << state.n_train << " train and " << state.n_test
            << " test samples to " << state.out << " (seed " << state.seed << ")\n";
}

// ----------------------------------------------------------- precompute --

struct PrecomputeState {
  std::string data;
  std::string method = "dijkstra";
  int k = 16;
  double t_scale = 1.0;
  bool overwrite = false;
  bool report_spearman = false;
};

void run_precompute(const PrecomputeState& state) {
  const GeodesicMethod method = geodesic_method_from_string(state.method);
  const auto dirs = find_sample_dirs(state.data);
  int done = 0, skipped = 0;
  for (const auto& dir : dirs) {
    if (!state.overwrite && sample_has_geodesic(dir)) {
      ++skipped;
      continue;
    }
    AnnotatedSample sample = load_sample(dir);
    sample.geodesic.reset();
    sample = geodesic_field(std::move(sample), method, state.k, state.t_scale);
    if (state.report_spearman) {
      const NeighborGraph graph = build_knn_graph(sample.cloud, state.k);
      const GeodesicField reference = dijkstra_field(graph, sample.keypoints.indices);
      const GeodesicField& chosen = *sample.geodesic;
      double mean = 0.0;
      for (Index j = 0; j < chosen.values.cols(); ++j) {
        std::vector<double> a(chosen.values.rows()), b(chosen.values.rows());
        for (Index i = 0; i < chosen.values.rows(); ++i) {
          a[static_cast<std::size_t>(i)] = chosen.values(i, j);
          b[static_cast<std::size_t>(i)] = reference.values(i, j);
        }
        mean += spearman(a, b);
      }
      mean /= static_cast<double>(chosen.values.cols());
      std::cout << dir.filename().string() << " spearman_vs_dijkstra=" << mean << "\n";
    }
    write_geodesic(dir / "geodesic.bin", *sample.geodesic);
    ++done;
  }
  std::cout << "precomputed " << done << " samples (" << to_string(method) << "), skipped "
            << skipped << "\n";
}

// ---------------------------------------------------------------- train --

struct TrainState {
  std::string data;
  std::string test;
  std::string out;
  std::string config_path;
  TrainConfig staged;
  bool no_augment = false;
  bool no_calib = false;
  bool no_dropout = false;
  bool no_scale = false;
  bool no_flip = false;
  bool no_shear = false;

  CLI::Option* opt_epochs = nullptr;
  CLI::Option* opt_batch = nullptr;
  CLI::Option* opt_lr = nullptr;
  CLI::Option* opt_momentum = nullptr;
  CLI::Option* opt_subsample = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_threads = nullptr;

  // defaults, then config file, then explicit flags
  TrainConfig resolve() const {
    TrainConfig cfg;
    apply_json(load_config_file(config_path), cfg);
    if (opt_epochs->count()) cfg.epochs = staged.epochs;
    if (opt_batch->count()) cfg.batch_size = staged.batch_size;
    if (opt_lr->count()) cfg.learning_rate = staged.learning_rate;
    if (opt_momentum->count()) cfg.momentum = staged.momentum;
    if (opt_subsample->count()) cfg.subsample_n = staged.subsample_n;
    if (opt_seed->count()) cfg.seed = staged.seed;
    if (opt_threads->count()) cfg.threads = staged.threads;
    if (no_augment) cfg.augmentation_enabled = false;
    if (no_calib) {
      cfg.augmentation.calib_rot_sigma = 0.0;
      cfg.augmentation.calib_trans_sigma = 0.0;
    }
    if (no_dropout) cfg.augmentation.camera_keep_prob = 1.0;
    if (no_scale) cfg.augmentation.scale_sigma = 0.0;
    if (no_flip) cfg.augmentation.flip_prob = 0.0;
    if (no_shear) cfg.augmentation.shear_sigma = 0.0;
    return cfg;
  }
};

void run_train(const TrainState& state) {
  const TrainConfig cfg = state.resolve();
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(fs::path(state.data), fs::path(state.test), cfg);

  fs::create_directories(state.out);
  save_history_csv(fs::path(state.out) / "history.csv", result.history);
  save_params(fs::path(state.out) / "params_final.mkrw", result.final_params);
  save_params(fs::path(state.out) / "params_best.mkrw", result.best_params);

  json echo;
  echo["train_dir"] = state.data;
  echo["test_dir"] = state.test;
  echo["config"] = to_json(cfg);
  echo["best_epoch"] = result.best_epoch;
  write_text(fs::path(state.out) / "config.json", echo.dump(2) + "\n");

  const auto& last = result.history.epochs.back();
  std::cout << "epoch " << last.epoch << ": train_loss " << last.train_loss << ", test_loss "
            << last.test_loss << ", test_rmse " << last.test_rmse_cm << " cm (best epoch "
            << result.best_epoch << ", " << seconds_since(start) << " s)\n";
}

// ----------------------------------------------------------------- eval --

struct EvalState {
  std::string data;
  std::string params;
  std::string out = "report.json";
  std::vector<int> drop_cameras;
  std::uint64_t seed = 0;
};

void run_eval(const EvalState& state) {
  const auto t0 = std::chrono::steady_clock::now();
  const RegressorParams params = load_params(state.params);
  const std::vector<AnnotatedSample> samples = load_dataset(state.data);
  const double load_s = seconds_since(t0);

  const auto t1 = std::chrono::steady_clock::now();
  const EvalResult result = evaluate_dataset(params, samples, state.drop_cameras);
  const double predict_s = seconds_since(t1);

  json report;
  report["rmse_cm"] = {{"aggregate", result.rmse_cm_aggregate},
                       {"per_keypoint", result.rmse_cm_per_keypoint}};
  json confidences = json::array();
  for (const auto& s : result.samples) confidences.push_back(s.confidences);
  report["confidences"] = std::move(confidences);
  report["config"] = {{"data", state.data},
                      {"params", state.params},
                      {"drop_cameras", state.drop_cameras}};
  report["seed"] = state.seed;
  report["timings_s"] = {
      {"load", load_s}, {"predict", predict_s}, {"total", seconds_since(t0)}};
  write_text(state.out, report.dump(2) + "\n");

  std::cout << "rmse " << result.rmse_cm_aggregate << " cm over " << result.samples.size()
            << " samples -> " << state.out << "\n";
}

// --------------------------------------------------------------- ablate --

struct AblateState {
  std::string data;
  std::string test;
  std::string out;
  std::string config_path;
  std::vector<int> train_sizes = {50, 25, 10};
  int seeds = 3;
  std::uint64_t seed = 0;
  int epochs = 0;  // 0 keeps the config value
  int threads = 0;
};

void run_ablate(const AblateState& state) {
  if (state.seeds < 1) throw InvalidParams("--seeds must be >= 1");
  TrainConfig base;
  apply_json(load_config_file(state.config_path), base);
  if (state.epochs > 0) base.epochs = state.epochs;
  if (state.threads > 0) base.threads = state.threads;

  const std::vector<AnnotatedSample> full_train = load_dataset(state.data);
  const std::vector<AnnotatedSample> test = load_dataset(state.test);

  std::string csv = "train_size,augmented,seeds,median_test_mse,median_test_rmse_cm\n";
  for (const int size : state.train_sizes) {
    if (size < 1 || size > static_cast<int>(full_train.size()))
      throw DataError("train size " + std::to_string(size) + " exceeds dataset of " +
                      std::to_string(full_train.size()));
    const std::vector<AnnotatedSample> subset(full_train.begin(), full_train.begin() + size);
    for (const bool augmented : {true, false}) {
      std::vector<double> losses, rmses;
      for (int s = 0; s < state.seeds; ++s) {
        TrainConfig cfg = base;
        cfg.augmentation_enabled = augmented;
        cfg.seed = state.seed + static_cast<std::uint64_t>(s);
        const TrainResult result = train(subset, test, cfg);
        losses.push_back(result.history.epochs.back().test_loss);
        rmses.push_back(evaluate_dataset(result.final_params, test).rmse_cm_aggregate);
      }
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%d,%d,%.9g,%.9g\n", size, augmented ? 1 : 0,
                    state.seeds, median(losses), median(rmses));
      csv += line;
      std::cout << "size " << size << (augmented ? " aug" : " raw") << ": median mse "
                << median(losses) << ", median rmse " << median(rmses) << " cm\n";
    }
  }
  write_text(state.out, csv);
}

}  // namespace

void setup(CLI::App& app) {
  app.require_subcommand(1);

  {
    auto state = std::make_shared<SynthState>();
    CLI::App* sub = app.add_subcommand("synth", "Generate a synthetic annotated dataset");
    sub->add_option("--out", state->out, "Output dataset directory")->required();
    sub->add_option("--train", state->n_train, "Training samples");
    sub->add_option("--test", state->n_test, "Test samples");
    sub->add_option("--seed", state->seed, "Generator seed");
    sub->add_option("--config", state->config_path,
                    "JSON with quadruped / rig / pipeline sections");
    sub->callback([state] { run_synth(*state); });
  }

  {
    auto state = std::make_shared<PrecomputeState>();
    CLI::App* sub = app.add_subcommand("precompute", "Compute per-sample geodesic fields");
    sub->add_option("--data", state->data, "Dataset or split directory")->required();
    sub->add_option("--method", state->method, "dijkstra or heat")
        ->check(CLI::IsMember({"dijkstra", "heat"}));
    sub->add_option("--k", state->k, "kNN graph neighbors");
    sub->add_option("--t-scale", state->t_scale, "Heat time scale");
    sub->add_flag("--overwrite", state->overwrite, "Recompute existing fields");
    sub->add_flag("--report-spearman", state->report_spearman,
                  "Report rank correlation against the Dijkstra oracle");
    sub->callback([state] { run_precompute(*state); });
  }

  {
    auto state = std::make_shared<TrainState>();
    CLI::App* sub = app.add_subcommand("train", "Train the keypoint regressor");
    sub->add_option("--data", state->data, "Training split directory")->required();
    sub->add_option("--test", state->test, "Test split directory")->required();
    sub->add_option("--out", state->out, "Output directory")->required();
    sub->add_option("--config", state->config_path, "JSON training config");
    state->opt_epochs = sub->add_option("--epochs", state->staged.epochs);
    state->opt_batch = sub->add_option("--batch", state->staged.batch_size);
    state->opt_lr = sub->add_option("--lr", state->staged.learning_rate);
    state->opt_momentum = sub->add_option("--momentum", state->staged.momentum);
    state->opt_subsample = sub->add_option("--subsample", state->staged.subsample_n);
    state->opt_seed = sub->add_option("--seed", state->staged.seed);
    state->opt_threads = sub->add_option("--threads", state->staged.threads);
    sub->add_flag("--no-augment", state->no_augment, "Disable all augmentation");
    sub->add_flag("--no-calib", state->no_calib, "Disable calibration jitter");
    sub->add_flag("--no-dropout", state->no_dropout, "Disable camera dropout");
    sub->add_flag("--no-scale", state->no_scale, "Disable random scaling");
    sub->add_flag("--no-flip", state->no_flip, "Disable random flipping");
    sub->add_flag("--no-shear", state->no_shear, "Disable shear deformation");
    sub->callback([state] { run_train(*state); });
  }

  {
    auto state = std::make_shared<EvalState>();
    CLI::App* sub = app.add_subcommand("eval", "Evaluate trained parameters on a test split");
    sub->add_option("--data", state->data, "Test split directory")->required();
    sub->add_option("--params", state->params, "Trained params file")->required();
    sub->add_option("--out", state->out, "Report JSON path");
    sub->add_option("--drop-camera", state->drop_cameras,
                    "Camera id(s) to remove at test time");
    sub->add_option("--seed", state->seed, "Echoed into the report");
    sub->callback([state] { run_eval(*state); });
  }

  {
    auto state = std::make_shared<AblateState>();
    CLI::App* sub = app.add_subcommand("ablate", "Sample-size and augmentation on/off study");
    sub->add_option("--data", state->data, "Training split directory")->required();
    sub->add_option("--test", state->test, "Test split directory")->required();
    sub->add_option("--out", state->out, "Output CSV path")->required();
    sub->add_option("--train-sizes", state->train_sizes, "Training set sizes")->delimiter(',');
    sub->add_option("--seeds", state->seeds, "Seeds per cell, median reported");
    sub->add_option("--seed", state->seed, "Base seed");
    sub->add_option("--epochs", state->epochs, "Epochs per run");
    sub->add_option("--threads", state->threads, "Workers per minibatch");
    sub->add_option("--config", state->config_path, "JSON training config");
    sub->callback([state] { run_ablate(*state); });
  }
}

}  // namespace manikey::cli
