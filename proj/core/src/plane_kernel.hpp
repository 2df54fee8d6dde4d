#pragma once

// Shared recurrent kernels for every quad-directional model in the library:
// the single RNN, the transfer-coupled pair, and the middle-fusion pair.

#include <span>
#include <vector>

#include "mmrnn/grid.hpp"
#include "mmrnn/linalg.hpp"
#include "mmrnn/plane.hpp"

namespace mmrnn::detail {

struct RecurrentWeights {
  const Mat* input = nullptr;      // U
  const Mat* recurrent = nullptr;  // W
  const Mat* transfer = nullptr;   // S; null when the modality is uncoupled
  const Vec* bias = nullptr;
};

struct RecurrentGrads {
  Mat* input = nullptr;
  Mat* recurrent = nullptr;
  Mat* transfer = nullptr;
  Vec* bias = nullptr;
};

// One scan direction for one or two modalities. A modality with a transfer
// matrix reads the other modality's predecessor hiddens through it, so two
// modalities are required whenever any transfer matrix is set.
void forward_plane(Direction dir, std::span<const RecurrentWeights> weights,
                   std::span<const PatchGrid* const> grids, int hidden_dim, std::span<PlaneTrace> traces);

// dh[m] enters holding the direct (output-layer) error of every cell and is
// consumed as the BPTT accumulator. When cross_terms is false the error that
// flows into the other modality through S is dropped.
void backward_plane(Direction dir, std::span<const RecurrentWeights> weights,
                    std::span<const PatchGrid* const> grids, std::span<const PlaneTrace> traces,
                    std::span<std::vector<double>> dh, std::span<const RecurrentGrads> grads, bool cross_terms);

// g' of the masked mean cross entropy: (p - onehot(label)) / N at valid
// cells, zero elsewhere. Returns H*W*B.
std::vector<double> output_error(std::span<const double> probs, const PatchGrid& grid);

// -(1/N) sum over valid cells of log p[label]; 0 when N = 0.
double masked_nll(std::span<const double> probs, const PatchGrid& grid);

}  // namespace mmrnn::detail
