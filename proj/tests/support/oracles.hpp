#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mmrnn/coupled.hpp"
#include "mmrnn/grid.hpp"
#include "mmrnn/metrics.hpp"
#include "mmrnn/random.hpp"
#include "mmrnn/rnn2d.hpp"

namespace mmrnn::oracle {

template <ParameterSet P>
void fill_uniform(P& params, std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& block : params.blocks()) {
    for (double& x : block.values) x = rng.uniform(-scale, scale);
  }
}

// N(0,1) features; each cell is unlabeled with probability unlabeled_frac.
PatchGrid random_grid(int height, int width, int feat_dim, int num_classes, std::uint64_t seed,
                      double unlabeled_frac = 0.0);
GridPair random_pair(int height, int width, int color_dim, int depth_dim, int num_classes, std::uint64_t seed,
                     double unlabeled_frac = 0.0);

// Logits of the coupled model computed by recursive evaluation of each
// hidden node from its definition, with no scan order. [modality] H*W*B.
std::array<std::vector<double>, 2> unrolled_coupled_logits(const MultimodalModel& model, const PatchGrid& color,
                                                           const PatchGrid& depth);

// Same for the single-modality model. H*W*B.
std::vector<double> unrolled_single_logits(const SingleModel& model, const PatchGrid& grid);

// Loss and gradients of a 1 x W grid treated as four 1D recurrences
// (left-to-right for TL and BL, right-to-left for TR and BR).
struct RowResult {
  std::vector<double> logits;
  double loss = 0.0;
  SingleModel grads;
};
RowResult row_rnn(const SingleModel& model, const PatchGrid& row);

// -(1/N) sum over valid cells of log p[label].
double direct_nll(const std::vector<double>& probs, const PatchGrid& grid);

std::vector<double> softmax_rows(const std::vector<double>& logits, int classes);

// Metrics from raw (truth, prediction) pairs by per-class counting.
MetricSummary brute_force_metrics(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

// Distance of the closest ReLU pre-activation to the kink at zero. Central
// differences are only meaningful when this exceeds the perturbation's reach.
double min_abs_pre(const SingleCache& cache);

// Coupled loss evaluated in long double, independently of the production
// forward pass. `target` may point at one parameter inside `model`; that
// parameter is shifted by `delta` in extended precision.
long double extended_coupled_loss(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth,
                                  const double* target = nullptr, long double delta = 0.0L);

// Central differences of extended_coupled_loss for every parameter.
MultimodalModel extended_fd_grad(const MultimodalModel& model, const PatchGrid& color, const PatchGrid& depth,
                                 long double epsilon = 1e-5L);

}  // namespace mmrnn::oracle
