#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mmrnn/grid.hpp"
#include "mmrnn/linalg.hpp"
#include "mmrnn/plane.hpp"

namespace mmrnn {

enum class Modality : std::uint8_t { Color = 0, Depth = 1 };

inline constexpr std::array<Modality, 2> kModalities{Modality::Color, Modality::Depth};
constexpr std::size_t index_of(Modality m) noexcept { return static_cast<std::size_t>(m); }
constexpr Modality other(Modality m) noexcept {
  return m == Modality::Color ? Modality::Depth : Modality::Color;
}
std::string_view to_string(Modality m) noexcept;

struct MultimodalDims {
  int color_dim = 0;
  int depth_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;

  int input_dim(Modality m) const noexcept { return m == Modality::Color ? color_dim : depth_dim; }
  friend bool operator==(const MultimodalDims&, const MultimodalDims&) = default;
};

/// One scan direction of one modality. `transfer` (S) maps the other
/// modality's packed predecessor hiddens into this modality's hidden space.
struct CoupledPlaneParams {
  Mat input;      // U: Dh x D_m
  Mat recurrent;  // W: Dh x Dh
  Mat transfer;   // S: Dh x Dh
  Mat output;     // V: B x Dh
  Vec bias;       // b: Dh
  bool operator==(const CoupledPlaneParams&) const = default;
};

struct ModalityParams {
  std::array<CoupledPlaneParams, 4> planes;
  Vec output_bias;  // c, shared across directions

  CoupledPlaneParams& plane(Direction d) noexcept { return planes[index_of(d)]; }
  const CoupledPlaneParams& plane(Direction d) const noexcept { return planes[index_of(d)]; }
  bool operator==(const ModalityParams&) const = default;
};

/// Two quad-directional 2D-RNNs cross-connected by transfer layers. Also
/// serves as its own gradient type.
class MultimodalModel {
 public:
  MultimodalModel() = default;
  explicit MultimodalModel(const MultimodalDims& dims);

  const MultimodalDims& dims() const noexcept { return dims_; }
  ModalityParams& modality(Modality m) noexcept { return modalities_[index_of(m)]; }
  const ModalityParams& modality(Modality m) const noexcept { return modalities_[index_of(m)]; }

  // Zeroes every transfer matrix.
  void clear_transfer();

  // Block order: color then depth; per modality, for each direction TL, TR,
  // BL, BR: U, W, S, V, b; then c. This is also the on-disk order.
  std::vector<ParamBlock> blocks();
  std::vector<ConstParamBlock> blocks() const;

  bool operator==(const MultimodalModel&) const = default;

 private:
  template <class Self, class F>
  static void visit(Self& self, F&& f);

  MultimodalDims dims_;
  std::array<ModalityParams, 2> modalities_;
};

using Gradients = MultimodalModel;

struct ForwardCache {
  int height = 0;
  int width = 0;
  MultimodalDims dims;
  std::array<std::array<PlaneTrace, 2>, 4> planes;  // [direction][modality]
  std::array<std::vector<double>, 2> logits;        // [modality] H*W*B
  std::array<std::vector<double>, 2> probs;

  const PlaneTrace& plane(Modality m, Direction d) const noexcept { return planes[index_of(d)][index_of(m)]; }
  std::span<const double> probs_at(Modality m, int i, int j) const noexcept {
    const auto b = static_cast<std::size_t>(dims.num_classes);
    return std::span<const double>(probs[index_of(m)]).subspan((static_cast<std::size_t>(i) * width + j) * b, b);
  }
};

enum class BackwardMode : std::uint8_t {
  // Exact gradient, including error that reaches a modality through the
  // other modality's transfer layer.
  Full,
  // Drops the cross-modal back-terms: only W^T error is relayed to
  // predecessors. S still receives its gradient. Not the true gradient
  // once S != 0.
  PaperFaithful,
};

struct CoupledBackward {
  Gradients grads;
  double loss = 0.0;
};

ForwardCache forward_coupled(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth);

// Sum of both modalities' masked cross entropies over N valid cells (N, not 2N).
double loss_coupled(const ForwardCache& cache, const PatchGrid& color, const PatchGrid& depth);

CoupledBackward backward_coupled(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth,
                                 const ForwardCache& cache, BackwardMode mode = BackwardMode::Full);

// Mean of the two modalities' softmax outputs per cell.
ProbMap fused_probabilities(const ForwardCache& cache);

// Argmax of the fused distribution for every cell, valid or not.
LabelMap predict_labels(const ForwardCache& cache);

}  // namespace mmrnn
