#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrnn/coupled.hpp"
#include "mmrnn/grid.hpp"
#include "mmrnn/linalg.hpp"
#include "mmrnn/rnn2d.hpp"

namespace mmrnn {

enum class InitScheme : std::uint8_t {
  // Weights ~ Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  UniformFanIn,
  // Every parameter zero.
  Zeros,
};

struct TrainConfig {
  double lr0 = 1e-5;
  double lr_decay = 0.99;  // multiplicative, per epoch
  double momentum = 0.9;
  double clip_threshold = 2000.0;
  int hidden_dim = 64;
  int epochs = 30;
  std::uint64_t seed = 0;
  BackwardMode backward_mode = BackwardMode::Full;
  InitScheme init_scheme = InitScheme::UniformFanIn;
  // Keep every transfer matrix at zero (init and updates).
  bool freeze_transfer = false;

  void validate() const;
};

// Learning rate used during 0-based epoch e: lr0 * decay^e.
inline double learning_rate(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(cfg.lr_decay, epoch);
}

/// Independent initialization streams. Parameters with the same stream,
/// direction and role draw identical values across model families, so
/// baselines share init draws wherever their structure coincides.
enum class InitStream : std::uint64_t { Color = 1, Depth = 2, Concat = 3, Joint = 4 };

MultimodalModel init_model(const TrainConfig& cfg, const MultimodalDims& dims, std::uint64_t seed);
SingleModel init_single(const TrainConfig& cfg, const SingleDims& dims, std::uint64_t seed, InitStream stream);

// Fills m (rows x cols) from the stream for (seed, stream, direction, role).
void init_matrix(Mat& m, InitScheme scheme, std::uint64_t seed, InitStream stream, Direction d, char role);

/// Classical momentum: vel = momentum * vel - lr * grads; model += vel.
template <ParameterSet P>
void sgd_step(P& model, P& velocity, const P& grads, double lr, double momentum) {
  auto mb = model.blocks();
  auto vb = velocity.blocks();
  const auto gb = grads.blocks();
  if (mb.size() != vb.size() || mb.size() != gb.size()) throw std::invalid_argument("sgd_step: shape mismatch");
  for (std::size_t b = 0; b < mb.size(); ++b) {
    if (mb[b].values.size() != gb[b].values.size() || mb[b].values.size() != vb[b].values.size()) {
      throw std::invalid_argument("sgd_step: block " + mb[b].name + " size mismatch");
    }
    for (std::size_t k = 0; k < mb[b].values.size(); ++k) {
      vb[b].values[k] = momentum * vb[b].values[k] - lr * gb[b].values[k];
      mb[b].values[k] += vb[b].values[k];
    }
  }
}

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double loss = 0.0;       // mean per-image loss
  double pixel_acc = 0.0;  // training accuracy over valid cells, pre-update predictions
};

// {"epoch":..,"lr":..,"loss":..,"pixel_acc":..}
std::string to_json_line(const EpochRecord& record);

struct StepEvent {
  int epoch = 0;
  std::size_t step = 0;
  std::size_t sample = 0;
  double lr = 0.0;
  double grad_norm = 0.0;     // before clipping
  double applied_norm = 0.0;  // after clipping
};

struct TrainHooks {
  std::function<void(const StepEvent&)> on_step;
  std::function<void(const EpochRecord&)> on_epoch;
};

// Visit order of the dataset in 0-based epoch e (Fisher-Yates).
std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t count);

template <class Model>
struct StepOutput {
  Model grads;
  double loss = 0.0;
  std::size_t correct = 0;
  std::size_t counted = 0;
};

template <class Model>
struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

/// Epoch loop shared by every model family: per image, step_fn returns the
/// gradient, which is clipped to the global norm threshold and applied with
/// momentum SGD.
template <ParameterSet Model, class StepFn>
TrainResult<Model> run_training(const TrainConfig& cfg, Model model, std::size_t samples, StepFn&& step_fn,
                                const TrainHooks& hooks = {}) {
  cfg.validate();
  if (samples == 0) throw std::invalid_argument("run_training: empty dataset");
  TrainResult<Model> result{std::move(model), {}};
  Model velocity = zeros_like(result.model);
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t counted = 0;
    for (std::size_t sample : epoch_order(cfg.seed, epoch, samples)) {
      StepOutput<Model> out = step_fn(static_cast<const Model&>(result.model), sample);
      const double norm = global_norm(out.grads);
      Model applied = global_norm_clip(std::move(out.grads), cfg.clip_threshold);
      if (hooks.on_step) hooks.on_step({epoch + 1, step, sample, lr, norm, global_norm(applied)});
      sgd_step(result.model, velocity, applied, lr, cfg.momentum);
      loss_sum += out.loss;
      correct += out.correct;
      counted += out.counted;
      ++step;
    }
    EpochRecord record{epoch + 1, lr, loss_sum / static_cast<double>(samples),
                       counted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(counted)};
    result.history.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
  }
  return result;
}

// Counts cells where predicted == label among valid cells.
void count_correct(const LabelMap& predicted, const PatchGrid& truth, std::size_t& correct, std::size_t& counted);

/// Trains the coupled model on (color, depth) pairs.
TrainResult<MultimodalModel> train_epochs(const TrainConfig& cfg, const std::vector<GridPair>& dataset,
                                          const TrainHooks& hooks = {});

// Same loop starting from a given model.
TrainResult<MultimodalModel> train_from(const TrainConfig& cfg, MultimodalModel model,
                                        const std::vector<GridPair>& dataset, const TrainHooks& hooks = {});

/// Trains a single quad-directional RNN on the grids selected from dataset.
TrainResult<SingleModel> train_single(const TrainConfig& cfg, SingleModel model, const std::vector<PatchGrid>& grids,
                                      const TrainHooks& hooks = {});

MultimodalDims dims_of(const GridPair& pair, int hidden_dim);

}  // namespace mmrnn
