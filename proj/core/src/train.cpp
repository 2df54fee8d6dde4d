#include "mmrnn/train.hpp"

#include "json.hpp"

#include "mmrnn/random.hpp"

namespace mmrnn {

void TrainConfig::validate() const {
  if (!(lr0 >= 0.0)) throw std::invalid_argument("TrainConfig: lr0 must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
  if (!(clip_threshold > 0.0)) throw std::invalid_argument("TrainConfig: clip threshold must be positive");
  if (!(lr_decay > 0.0)) throw std::invalid_argument("TrainConfig: lr decay must be positive");
  if (hidden_dim < 1) throw std::invalid_argument("TrainConfig: hidden dim must be positive");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
}

void init_matrix(Mat& m, InitScheme scheme, std::uint64_t seed, InitStream stream, Direction d, char role) {
  if (scheme == InitScheme::Zeros) {
    for (double& x : m.values()) x = 0.0;
    return;
  }
  const std::uint64_t key = (static_cast<std::uint64_t>(stream) << 16) | (index_of(d) << 8) |
                            static_cast<std::uint64_t>(static_cast<unsigned char>(role));
  Rng rng(mix_seed(seed, key));
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
  for (double& x : m.values()) x = rng.uniform(-bound, bound);
}

MultimodalModel init_model(const TrainConfig& cfg, const MultimodalDims& dims, std::uint64_t seed) {
  MultimodalModel model(dims);
  for (Modality m : kModalities) {
    const InitStream stream = m == Modality::Color ? InitStream::Color : InitStream::Depth;
    for (Direction d : kDirections) {
      CoupledPlaneParams& p = model.modality(m).plane(d);
      init_matrix(p.input, cfg.init_scheme, seed, stream, d, 'U');
      init_matrix(p.recurrent, cfg.init_scheme, seed, stream, d, 'W');
      init_matrix(p.transfer, cfg.init_scheme, seed, stream, d, 'S');
      init_matrix(p.output, cfg.init_scheme, seed, stream, d, 'V');
    }
  }
  if (cfg.freeze_transfer) model.clear_transfer();
  return model;
}

SingleModel init_single(const TrainConfig& cfg, const SingleDims& dims, std::uint64_t seed, InitStream stream) {
  SingleModel model(dims);
  for (Direction d : kDirections) {
    PlaneParams& p = model.plane(d);
    init_matrix(p.input, cfg.init_scheme, seed, stream, d, 'U');
    init_matrix(p.recurrent, cfg.init_scheme, seed, stream, d, 'W');
    init_matrix(p.output, cfg.init_scheme, seed, stream, d, 'V');
  }
  return model;
}

std::string to_json_line(const EpochRecord& record) {
  nlohmann::ordered_json j;
  j["epoch"] = record.epoch;
  j["lr"] = record.lr;
  j["loss"] = record.loss;
  j["pixel_acc"] = record.pixel_acc;
  return j.dump();
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t count) {
  std::vector<std::size_t> order(count);
  for (std::size_t k = 0; k < count; ++k) order[k] = k;
  Rng rng(mix_seed(mix_seed(seed, 0x73687566666c65ULL), static_cast<std::uint64_t>(epoch)));
  for (std::size_t k = count; k > 1; --k) {
    const std::size_t r = rng.below(k);
    std::swap(order[k - 1], order[r]);
  }
  return order;
}

void count_correct(const LabelMap& predicted, const PatchGrid& truth, std::size_t& correct, std::size_t& counted) {
  for (std::size_t k = 0; k < truth.cell_count(); ++k) {
    const int label = truth.labels()[k];
    if (label == kUnlabeled) continue;
    ++counted;
    if (predicted.labels[k] == label) ++correct;
  }
}

MultimodalDims dims_of(const GridPair& pair, int hidden_dim) {
  return {pair.color.feat_dim(), pair.depth.feat_dim(), hidden_dim, pair.color.num_classes()};
}

TrainResult<MultimodalModel> train_epochs(const TrainConfig& cfg, const std::vector<GridPair>& dataset,
                                          const TrainHooks& hooks) {
  if (dataset.empty()) throw std::invalid_argument("train_epochs: empty dataset");
  return train_from(cfg, init_model(cfg, dims_of(dataset.front(), cfg.hidden_dim), cfg.seed), dataset, hooks);
}

TrainResult<MultimodalModel> train_from(const TrainConfig& cfg, MultimodalModel model,
                                        const std::vector<GridPair>& dataset, const TrainHooks& hooks) {
  if (dataset.empty()) throw std::invalid_argument("train_epochs: empty dataset");
  for (const auto& pair : dataset) require_aligned(pair.color, pair.depth);
  auto step = [&](const MultimodalModel& current, std::size_t sample) {
    const GridPair& pair = dataset[sample];
    const ForwardCache cache = forward_coupled(current, pair.color, pair.depth);
    CoupledBackward back = backward_coupled(current, pair.color, pair.depth, cache, cfg.backward_mode);
    if (cfg.freeze_transfer) back.grads.clear_transfer();
    StepOutput<MultimodalModel> out{std::move(back.grads), back.loss};
    count_correct(predict_labels(cache), pair.color, out.correct, out.counted);
    return out;
  };
  return run_training(cfg, std::move(model), dataset.size(), step, hooks);
}

TrainResult<SingleModel> train_single(const TrainConfig& cfg, SingleModel model, const std::vector<PatchGrid>& grids,
                                      const TrainHooks& hooks) {
  if (grids.empty()) throw std::invalid_argument("train_single: empty dataset");
  auto step = [&](const SingleModel& current, std::size_t sample) {
    const PatchGrid& grid = grids[sample];
    const SingleCache cache = forward_single(current, grid);
    SingleBackward back = backward_single(current, grid, cache);
    StepOutput<SingleModel> out{std::move(back.grads), back.loss};
    count_correct(predict_single(cache), grid, out.correct, out.counted);
    return out;
  };
  return run_training(cfg, std::move(model), grids.size(), step, hooks);
}

}  // namespace mmrnn
