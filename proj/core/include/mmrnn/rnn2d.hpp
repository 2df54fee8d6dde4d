#pragma once

#include <array>
#include <span>
#include <vector>

#include "mmrnn/grid.hpp"
#include "mmrnn/linalg.hpp"
#include "mmrnn/plane.hpp"

namespace mmrnn {

struct SingleDims {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 0;
  friend bool operator==(const SingleDims&, const SingleDims&) = default;
};

/// Weights of one scan direction: U (Dh x D), W (Dh x Dh, shared by both
/// predecessors), V (B x Dh), b (Dh).
struct PlaneParams {
  Mat input;
  Mat recurrent;
  Mat output;
  Vec bias;
  bool operator==(const PlaneParams&) const = default;
};

/// Quad-directional 2D-RNN over one modality. The output bias is shared by
/// all four directions.
class SingleModel {
 public:
  SingleModel() = default;
  explicit SingleModel(const SingleDims& dims);

  const SingleDims& dims() const noexcept { return dims_; }
  PlaneParams& plane(Direction d) noexcept { return planes_[index_of(d)]; }
  const PlaneParams& plane(Direction d) const noexcept { return planes_[index_of(d)]; }
  Vec& output_bias() noexcept { return output_bias_; }
  const Vec& output_bias() const noexcept { return output_bias_; }

  // Block order: for each direction TL, TR, BL, BR: U, W, V, b; then c.
  std::vector<ParamBlock> blocks();
  std::vector<ConstParamBlock> blocks() const;

  bool operator==(const SingleModel&) const = default;

 private:
  template <class Self, class F>
  static void visit(Self& self, F&& f);

  SingleDims dims_;
  std::array<PlaneParams, 4> planes_;
  Vec output_bias_;
};

struct SingleCache {
  int height = 0;
  int width = 0;
  int num_classes = 0;
  std::array<PlaneTrace, 4> planes;
  std::vector<double> logits;  // H*W*B
  std::vector<double> probs;   // H*W*B

  const PlaneTrace& plane(Direction d) const noexcept { return planes[index_of(d)]; }
  std::span<const double> probs_at(int i, int j) const noexcept {
    return std::span<const double>(probs).subspan((static_cast<std::size_t>(i) * width + j) * num_classes,
                                                  num_classes);
  }
};

struct SingleBackward {
  SingleModel grads;
  double loss = 0.0;
};

SingleCache forward_single(const SingleModel& model, const PatchGrid& grid);

// Mean negative log-likelihood over valid cells; probs is H*W*B.
double loss_single(std::span<const double> probs, const PatchGrid& grid);

SingleBackward backward_single(const SingleModel& model, const PatchGrid& grid, const SingleCache& cache);

// Per-cell argmax of the cached probabilities, lowest class on ties.
LabelMap predict_single(const SingleCache& cache);

ProbMap to_prob_map(const SingleCache& cache);

}  // namespace mmrnn
