#pragma once

#include <array>
#include <string_view>
#include <variant>
#include <vector>

#include "mmrnn/coupled.hpp"
#include "mmrnn/metrics.hpp"
#include "mmrnn/rnn2d.hpp"
#include "mmrnn/train.hpp"

namespace mmrnn {

enum class BaselineKind : std::uint8_t {
  SingleColor,     // one RNN on color features
  SingleDepth,     // one RNN on depth features
  ConcatInput,     // one RNN on [color; depth]
  PreFusion,       // same network as ConcatInput with a shared featurizer
  MiddleFusion,    // two uncoupled RNNs, hiddens concatenated into one classifier
  PostFusion,      // two independent RNNs, softmax outputs averaged
  MultimodalOurs,  // transfer-coupled pair
};

inline constexpr std::array<BaselineKind, 7> kBaselineKinds{
    BaselineKind::SingleColor, BaselineKind::SingleDepth, BaselineKind::ConcatInput,  BaselineKind::PreFusion,
    BaselineKind::MiddleFusion, BaselineKind::PostFusion, BaselineKind::MultimodalOurs};

std::string_view to_string(BaselineKind kind) noexcept;

// ---------------------------------------------------------------------------
// Middle fusion: per direction, uncoupled color and depth recurrences and a
// joint classifier V (B x 2Dh) over [h_color; h_depth]; one shared bias.

struct MiddlePlaneParams {
  Mat color_input, color_recurrent;
  Vec color_bias;
  Mat depth_input, depth_recurrent;
  Vec depth_bias;
  Mat output;  // B x 2Dh
  bool operator==(const MiddlePlaneParams&) const = default;
};

class MiddleFusionModel {
 public:
  MiddleFusionModel() = default;
  explicit MiddleFusionModel(const MultimodalDims& dims);

  const MultimodalDims& dims() const noexcept { return dims_; }
  MiddlePlaneParams& plane(Direction d) noexcept { return planes_[index_of(d)]; }
  const MiddlePlaneParams& plane(Direction d) const noexcept { return planes_[index_of(d)]; }
  Vec& output_bias() noexcept { return output_bias_; }
  const Vec& output_bias() const noexcept { return output_bias_; }

  std::vector<ParamBlock> blocks();
  std::vector<ConstParamBlock> blocks() const;

  bool operator==(const MiddleFusionModel&) const = default;

 private:
  template <class Self, class F>
  static void visit(Self& self, F&& f);

  MultimodalDims dims_;
  std::array<MiddlePlaneParams, 4> planes_;
  Vec output_bias_;
};

struct MiddleCache {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::array<std::array<PlaneTrace, 2>, 4> planes;  // [direction][modality]
  std::vector<double> logits;
  std::vector<double> probs;
};

struct MiddleBackward {
  MiddleFusionModel grads;
  double loss = 0.0;
};

MiddleCache forward_middle(const MiddleFusionModel& model, const PatchGrid& color, const PatchGrid& depth);
// Masked cross entropy against the color grid's labels.
double loss_middle(const MiddleCache& cache, const PatchGrid& color);
MiddleBackward backward_middle(const MiddleFusionModel& model, const PatchGrid& color, const PatchGrid& depth,
                               const MiddleCache& cache);

MiddleFusionModel init_middle(const TrainConfig& cfg, const MultimodalDims& dims, std::uint64_t seed);
TrainResult<MiddleFusionModel> train_middle(const TrainConfig& cfg, MiddleFusionModel model,
                                            const std::vector<GridPair>& dataset, const TrainHooks& hooks = {});

// ---------------------------------------------------------------------------

struct PostFusionModel {
  SingleModel color;
  SingleModel depth;
};

// Mean of two softmax maps of equal shape.
ProbMap average_probs(const ProbMap& a, const ProbMap& b);

/// A trained member of the ablation family behind one prediction interface.
class TrainedBaseline {
 public:
  using Model = std::variant<SingleModel, MiddleFusionModel, PostFusionModel, MultimodalModel>;

  TrainedBaseline(BaselineKind kind, Model model) : kind_(kind), model_(std::move(model)) {}

  BaselineKind kind() const noexcept { return kind_; }
  const Model& model() const noexcept { return model_; }

  // Class distribution per cell (fused where the kind fuses).
  ProbMap predict(const GridPair& pair) const;

 private:
  BaselineKind kind_;
  Model model_;
};

struct BaselineRun {
  TrainedBaseline trained;
  std::vector<EpochRecord> history;
};

// Post fusion history: per epoch, loss is the sum of both members' losses and
// pixel_acc their mean.
BaselineRun build_and_train(BaselineKind kind, const TrainConfig& cfg, const std::vector<GridPair>& dataset);

ConfusionMatrix evaluate(const TrainedBaseline& trained, const std::vector<GridPair>& dataset);

struct AblationRow {
  BaselineKind kind;
  MetricSummary metrics;
};

/// Trains all seven kinds with one config and seed on train_set and scores
/// them on eval_set. Pre fusion coincides with concat input here and post
/// fusion reuses the two single-modality runs.
std::vector<AblationRow> ablation_report(const std::vector<GridPair>& train_set, const std::vector<GridPair>& eval_set,
                                         const TrainConfig& cfg);

}  // namespace mmrnn
