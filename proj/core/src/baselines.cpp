#include "mmrnn/baselines.hpp"

#include <stdexcept>
#include <string>

#include "mmrnn/upsample.hpp"
#include "plane_kernel.hpp"

namespace mmrnn {

std::string_view to_string(BaselineKind kind) noexcept {
  switch (kind) {
    case BaselineKind::SingleColor: return "SINGLE_C";
    case BaselineKind::SingleDepth: return "SINGLE_D";
    case BaselineKind::ConcatInput: return "CONCAT_INPUT";
    case BaselineKind::PreFusion: return "PRE_FUSION";
    case BaselineKind::MiddleFusion: return "MIDDLE_FUSION";
    case BaselineKind::PostFusion: return "POST_FUSION";
    case BaselineKind::MultimodalOurs: return "MULTIMODAL_OURS";
  }
  return "?";
}

MiddleFusionModel::MiddleFusionModel(const MultimodalDims& dims) : dims_(dims), output_bias_(dims.num_classes) {
  if (dims.color_dim < 1 || dims.depth_dim < 1 || dims.hidden_dim < 1 || dims.num_classes < 2) {
    throw std::invalid_argument("MiddleFusionModel: invalid dimensions");
  }
  const auto h = static_cast<std::size_t>(dims.hidden_dim);
  for (auto& p : planes_) {
    p.color_input = Mat(h, static_cast<std::size_t>(dims.color_dim));
    p.color_recurrent = Mat(h, h);
    p.color_bias = Vec(h);
    p.depth_input = Mat(h, static_cast<std::size_t>(dims.depth_dim));
    p.depth_recurrent = Mat(h, h);
    p.depth_bias = Vec(h);
    p.output = Mat(static_cast<std::size_t>(dims.num_classes), 2 * h);
  }
}

template <class Self, class F>
void MiddleFusionModel::visit(Self& self, F&& f) {
  for (Direction d : kDirections) {
    auto& p = self.planes_[index_of(d)];
    const std::string prefix = std::string(to_string(d)) + ".";
    f(prefix + "c.U", p.color_input);
    f(prefix + "c.W", p.color_recurrent);
    f(prefix + "c.b", p.color_bias);
    f(prefix + "d.U", p.depth_input);
    f(prefix + "d.W", p.depth_recurrent);
    f(prefix + "d.b", p.depth_bias);
    f(prefix + "V", p.output);
  }
  f(std::string("c"), self.output_bias_);
}

std::vector<ParamBlock> MiddleFusionModel::blocks() {
  std::vector<ParamBlock> out;
  visit(*this, [&](std::string name, auto& x) { out.push_back({std::move(name), x.values()}); });
  return out;
}

std::vector<ConstParamBlock> MiddleFusionModel::blocks() const {
  std::vector<ConstParamBlock> out;
  visit(*this, [&](std::string name, const auto& x) { out.push_back({std::move(name), x.values()}); });
  return out;
}

namespace {

std::array<detail::RecurrentWeights, 2> middle_weights(const MiddlePlaneParams& p) {
  return {detail::RecurrentWeights{&p.color_input, &p.color_recurrent, nullptr, &p.color_bias},
          detail::RecurrentWeights{&p.depth_input, &p.depth_recurrent, nullptr, &p.depth_bias}};
}

}  // namespace

MiddleCache forward_middle(const MiddleFusionModel& model, const PatchGrid& color, const PatchGrid& depth) {
  require_aligned(color, depth);
  const MultimodalDims& dims = model.dims();
  if (color.feat_dim() != dims.color_dim || depth.feat_dim() != dims.depth_dim ||
      color.num_classes() != dims.num_classes) {
    throw std::invalid_argument("forward_middle: grid dims do not match model");
  }
  MiddleCache cache;
  cache.height = color.height();
  cache.width = color.width();
  cache.num_classes = dims.num_classes;
  const PatchGrid* grids[2] = {&color, &depth};
  for (Direction d : kDirections) {
    const auto w = middle_weights(model.plane(d));
    detail::forward_plane(d, w, grids, dims.hidden_dim, cache.planes[index_of(d)]);
  }

  const auto classes = static_cast<std::size_t>(dims.num_classes);
  const auto hd = static_cast<std::size_t>(dims.hidden_dim);
  const std::size_t cells = color.cell_count();
  cache.logits.assign(cells * classes, 0.0);
  cache.probs.assign(cells * classes, 0.0);
  std::vector<double> joint(2 * hd);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    auto z = std::span<double>(cache.logits).subspan(cell * classes, classes);
    std::copy(model.output_bias().values().begin(), model.output_bias().values().end(), z.begin());
    for (Direction d : kDirections) {
      const auto hc = cache.planes[index_of(d)][0].hidden_at(cell);
      const auto hdp = cache.planes[index_of(d)][1].hidden_at(cell);
      std::copy(hc.begin(), hc.end(), joint.begin());
      std::copy(hdp.begin(), hdp.end(), joint.begin() + static_cast<std::ptrdiff_t>(hd));
      matvec_accumulate(model.plane(d).output, joint, z);
    }
    softmax_into(z, std::span<double>(cache.probs).subspan(cell * classes, classes));
  }
  return cache;
}

double loss_middle(const MiddleCache& cache, const PatchGrid& color) { return detail::masked_nll(cache.probs, color); }

MiddleBackward backward_middle(const MiddleFusionModel& model, const PatchGrid& color, const PatchGrid& depth,
                               const MiddleCache& cache) {
  const MultimodalDims& dims = model.dims();
  MiddleBackward out{MiddleFusionModel(dims), loss_middle(cache, color)};
  const auto classes = static_cast<std::size_t>(dims.num_classes);
  const auto hd = static_cast<std::size_t>(dims.hidden_dim);
  const std::size_t cells = color.cell_count();
  const std::vector<double> err = detail::output_error(cache.probs, color);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t b = 0; b < classes; ++b) out.grads.output_bias()[b] += err[cell * classes + b];
  }

  const PatchGrid* grids[2] = {&color, &depth};
  std::vector<double> joint(2 * hd);
  std::vector<double> back(2 * hd);
  for (Direction d : kDirections) {
    const MiddlePlaneParams& p = model.plane(d);
    MiddlePlaneParams& g = out.grads.plane(d);
    const auto& traces = cache.planes[index_of(d)];
    std::vector<double> dh[2] = {std::vector<double>(cells * hd, 0.0), std::vector<double>(cells * hd, 0.0)};
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const auto e = std::span<const double>(err).subspan(cell * classes, classes);
      const auto hc = traces[0].hidden_at(cell);
      const auto hdp = traces[1].hidden_at(cell);
      std::copy(hc.begin(), hc.end(), joint.begin());
      std::copy(hdp.begin(), hdp.end(), joint.begin() + static_cast<std::ptrdiff_t>(hd));
      add_outer(g.output, e, joint);
      std::fill(back.begin(), back.end(), 0.0);
      matvec_transposed_accumulate(p.output, e, back);
      for (std::size_t k = 0; k < hd; ++k) {
        dh[0][cell * hd + k] += back[k];
        dh[1][cell * hd + k] += back[hd + k];
      }
    }
    const auto w = middle_weights(p);
    const std::array<detail::RecurrentGrads, 2> gr{
        detail::RecurrentGrads{&g.color_input, &g.color_recurrent, nullptr, &g.color_bias},
        detail::RecurrentGrads{&g.depth_input, &g.depth_recurrent, nullptr, &g.depth_bias}};
    detail::backward_plane(d, w, grids, traces, dh, gr, false);
  }
  return out;
}

MiddleFusionModel init_middle(const TrainConfig& cfg, const MultimodalDims& dims, std::uint64_t seed) {
  MiddleFusionModel model(dims);
  for (Direction d : kDirections) {
    MiddlePlaneParams& p = model.plane(d);
    init_matrix(p.color_input, cfg.init_scheme, seed, InitStream::Color, d, 'U');
    init_matrix(p.color_recurrent, cfg.init_scheme, seed, InitStream::Color, d, 'W');
    init_matrix(p.depth_input, cfg.init_scheme, seed, InitStream::Depth, d, 'U');
    init_matrix(p.depth_recurrent, cfg.init_scheme, seed, InitStream::Depth, d, 'W');
    init_matrix(p.output, cfg.init_scheme, seed, InitStream::Joint, d, 'V');
  }
  return model;
}

TrainResult<MiddleFusionModel> train_middle(const TrainConfig& cfg, MiddleFusionModel model,
                                            const std::vector<GridPair>& dataset, const TrainHooks& hooks) {
  auto step = [&](const MiddleFusionModel& current, std::size_t sample) {
    const GridPair& pair = dataset[sample];
    const MiddleCache cache = forward_middle(current, pair.color, pair.depth);
    MiddleBackward back = backward_middle(current, pair.color, pair.depth, cache);
    StepOutput<MiddleFusionModel> out{std::move(back.grads), back.loss};
    ProbMap probs(cache.height, cache.width, cache.num_classes);
    probs.values = cache.probs;
    count_correct(argmax_map(probs), pair.color, out.correct, out.counted);
    return out;
  };
  return run_training(cfg, std::move(model), dataset.size(), step, hooks);
}

ProbMap average_probs(const ProbMap& a, const ProbMap& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("average_probs: shapes differ");
  ProbMap out(a.height, a.width, a.channels);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = 0.5 * (a.values[k] + b.values[k]);
  return out;
}

ProbMap TrainedBaseline::predict(const GridPair& pair) const {
  switch (kind_) {
    case BaselineKind::SingleColor:
      return to_prob_map(forward_single(std::get<SingleModel>(model_), pair.color));
    case BaselineKind::SingleDepth:
      return to_prob_map(forward_single(std::get<SingleModel>(model_), pair.depth));
    case BaselineKind::ConcatInput:
    case BaselineKind::PreFusion:
      return to_prob_map(forward_single(std::get<SingleModel>(model_), concat_features(pair.color, pair.depth)));
    case BaselineKind::MiddleFusion: {
      const MiddleCache cache = forward_middle(std::get<MiddleFusionModel>(model_), pair.color, pair.depth);
      ProbMap out(cache.height, cache.width, cache.num_classes);
      out.values = cache.probs;
      return out;
    }
    case BaselineKind::PostFusion: {
      const auto& post = std::get<PostFusionModel>(model_);
      return average_probs(to_prob_map(forward_single(post.color, pair.color)),
                           to_prob_map(forward_single(post.depth, pair.depth)));
    }
    case BaselineKind::MultimodalOurs:
      return fused_probabilities(forward_coupled(std::get<MultimodalModel>(model_), pair.color, pair.depth));
  }
  throw std::logic_error("TrainedBaseline: unknown kind");
}

namespace {

std::vector<PatchGrid> select(const std::vector<GridPair>& dataset, BaselineKind kind) {
  std::vector<PatchGrid> out;
  out.reserve(dataset.size());
  for (const auto& pair : dataset) {
    require_aligned(pair.color, pair.depth);
    switch (kind) {
      case BaselineKind::SingleColor: out.push_back(pair.color); break;
      case BaselineKind::SingleDepth: out.push_back(pair.depth); break;
      default: out.push_back(concat_features(pair.color, pair.depth)); break;
    }
  }
  return out;
}

BaselineRun train_single_kind(BaselineKind kind, const TrainConfig& cfg, const std::vector<GridPair>& dataset) {
  const std::vector<PatchGrid> grids = select(dataset, kind);
  const SingleDims dims{grids.front().feat_dim(), cfg.hidden_dim, grids.front().num_classes()};
  // Concat variants share the color stream so W and V start where SINGLE_C's do.
  const InitStream stream = kind == BaselineKind::SingleDepth ? InitStream::Depth : InitStream::Color;
  auto result = train_single(cfg, init_single(cfg, dims, cfg.seed, stream), grids);
  return {TrainedBaseline(kind, std::move(result.model)), std::move(result.history)};
}

BaselineRun combine_post(const BaselineRun& color, const BaselineRun& depth) {
  std::vector<EpochRecord> history;
  for (std::size_t e = 0; e < color.history.size(); ++e) {
    const EpochRecord& a = color.history[e];
    const EpochRecord& b = depth.history[e];
    history.push_back({a.epoch, a.lr, a.loss + b.loss, 0.5 * (a.pixel_acc + b.pixel_acc)});
  }
  PostFusionModel post{std::get<SingleModel>(color.trained.model()), std::get<SingleModel>(depth.trained.model())};
  return {TrainedBaseline(BaselineKind::PostFusion, std::move(post)), std::move(history)};
}

}  // namespace

BaselineRun build_and_train(BaselineKind kind, const TrainConfig& cfg, const std::vector<GridPair>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("build_and_train: empty dataset");
  switch (kind) {
    case BaselineKind::SingleColor:
    case BaselineKind::SingleDepth:
    case BaselineKind::ConcatInput:
    case BaselineKind::PreFusion:
      return train_single_kind(kind, cfg, dataset);
    case BaselineKind::MiddleFusion: {
      const MultimodalDims dims = dims_of(dataset.front(), cfg.hidden_dim);
      auto result = train_middle(cfg, init_middle(cfg, dims, cfg.seed), dataset);
      return {TrainedBaseline(kind, std::move(result.model)), std::move(result.history)};
    }
    case BaselineKind::PostFusion:
      return combine_post(train_single_kind(BaselineKind::SingleColor, cfg, dataset),
                          train_single_kind(BaselineKind::SingleDepth, cfg, dataset));
    case BaselineKind::MultimodalOurs: {
      auto result = train_epochs(cfg, dataset);
      return {TrainedBaseline(kind, std::move(result.model)), std::move(result.history)};
    }
  }
  throw std::logic_error("build_and_train: unknown kind");
}

ConfusionMatrix evaluate(const TrainedBaseline& trained, const std::vector<GridPair>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
  ConfusionMatrix cm(dataset.front().color.num_classes());
  for (const auto& pair : dataset) cm.accumulate(argmax_map(trained.predict(pair)), pair.color);
  return cm;
}

std::vector<AblationRow> ablation_report(const std::vector<GridPair>& train_set, const std::vector<GridPair>& eval_set,
                                         const TrainConfig& cfg) {
  const BaselineRun single_c = build_and_train(BaselineKind::SingleColor, cfg, train_set);
  const BaselineRun single_d = build_and_train(BaselineKind::SingleDepth, cfg, train_set);
  const BaselineRun concat = build_and_train(BaselineKind::ConcatInput, cfg, train_set);
  const TrainedBaseline pre(BaselineKind::PreFusion, concat.trained.model());
  const BaselineRun middle = build_and_train(BaselineKind::MiddleFusion, cfg, train_set);
  const BaselineRun post = combine_post(single_c, single_d);
  const BaselineRun ours = build_and_train(BaselineKind::MultimodalOurs, cfg, train_set);

  std::vector<AblationRow> rows;
  for (const TrainedBaseline* t : {&single_c.trained, &single_d.trained, &concat.trained, &pre, &middle.trained,
                                   &post.trained, &ours.trained}) {
    rows.push_back({t->kind(), summarize(evaluate(*t, eval_set))});
  }
  return rows;
}

}  // namespace mmrnn
