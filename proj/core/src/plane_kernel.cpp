#include "plane_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmrnn::detail {
namespace {

void check_weights(std::span<const RecurrentWeights> weights, std::span<const PatchGrid* const> grids) {
  if (weights.empty() || weights.size() > 2 || weights.size() != grids.size()) {
    throw std::invalid_argument("plane kernel: expects one or two modalities");
  }
  for (std::size_t m = 0; m < weights.size(); ++m) {
    const auto& w = weights[m];
    if (w.transfer != nullptr && weights.size() != 2) {
      throw std::invalid_argument("plane kernel: transfer matrix without a second modality");
    }
    if (static_cast<int>(w.input->cols()) != grids[m]->feat_dim()) {
      throw std::invalid_argument("plane kernel: input matrix " + shape_string(*w.input) +
                                  " does not match feature dim " + std::to_string(grids[m]->feat_dim()));
    }
  }
}

void add_into(std::span<double> dst, std::span<const double> src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

}  // namespace

void forward_plane(Direction dir, std::span<const RecurrentWeights> weights,
                   std::span<const PatchGrid* const> grids, int hidden_dim, std::span<PlaneTrace> traces) {
  check_weights(weights, grids);
  const int height = grids[0]->height();
  const int width = grids[0]->width();
  const std::size_t dh = static_cast<std::size_t>(hidden_dim);
  const std::size_t total = grids[0]->cell_count() * dh;
  const std::size_t count = weights.size();

  for (std::size_t m = 0; m < count; ++m) {
    PlaneTrace& t = traces[m];
    t.hidden_dim = hidden_dim;
    t.own_sum.assign(total, 0.0);
    if (weights[m].transfer != nullptr) {
      t.cross_sum.assign(total, 0.0);
    } else {
      t.cross_sum.clear();
    }
    t.pre.assign(total, 0.0);
    t.hidden.assign(total, 0.0);
  }

  for (const Cell& cell : scan_order(dir, height, width)) {
    const std::size_t at = grids[0]->cell_index(cell.i, cell.j) * dh;
    const Predecessors preds = predecessors(dir, cell.i, cell.j, height, width);
    for (std::size_t m = 0; m < count; ++m) {
      PlaneTrace& t = traces[m];
      const RecurrentWeights& w = weights[m];
      auto own = std::span<double>(t.own_sum).subspan(at, dh);
      for (const Cell& p : preds) {
        add_into(own, traces[m].hidden_at(grids[0]->cell_index(p.i, p.j)));
      }
      auto pre = std::span<double>(t.pre).subspan(at, dh);
      std::copy(w.bias->values().begin(), w.bias->values().end(), pre.begin());
      matvec_accumulate(*w.input, grids[m]->feature(cell.i, cell.j), pre);
      matvec_accumulate(*w.recurrent, own, pre);
      if (w.transfer != nullptr) {
        const std::size_t other = 1 - m;
        auto cross = std::span<double>(t.cross_sum).subspan(at, dh);
        for (const Cell& p : preds) {
          add_into(cross, traces[other].hidden_at(grids[0]->cell_index(p.i, p.j)));
        }
        matvec_accumulate(*w.transfer, cross, pre);
      }
      auto hidden = std::span<double>(t.hidden).subspan(at, dh);
      for (std::size_t k = 0; k < dh; ++k) hidden[k] = pre[k] > 0.0 ? pre[k] : 0.0;
    }
  }
}

void backward_plane(Direction dir, std::span<const RecurrentWeights> weights,
                    std::span<const PatchGrid* const> grids, std::span<const PlaneTrace> traces,
                    std::span<std::vector<double>> dh, std::span<const RecurrentGrads> grads, bool cross_terms) {
  check_weights(weights, grids);
  const int height = grids[0]->height();
  const int width = grids[0]->width();
  const std::size_t hd = static_cast<std::size_t>(traces[0].hidden_dim);
  const std::size_t count = weights.size();

  std::vector<double> delta(hd);
  std::vector<double> back(hd);
  auto order = scan_order(dir, height, width);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Cell cell = *it;
    const std::size_t at = grids[0]->cell_index(cell.i, cell.j) * hd;
    const Predecessors preds = predecessors(dir, cell.i, cell.j, height, width);
    for (std::size_t m = 0; m < count; ++m) {
      const PlaneTrace& t = traces[m];
      const RecurrentWeights& w = weights[m];
      const RecurrentGrads& g = grads[m];

      bool any = false;
      for (std::size_t k = 0; k < hd; ++k) {
        delta[k] = t.pre[at + k] > 0.0 ? dh[m][at + k] : 0.0;
        any = any || delta[k] != 0.0;
      }
      if (!any) continue;

      add_outer(*g.input, delta, grids[m]->feature(cell.i, cell.j));
      add_into(g.bias->values(), delta);
      if (preds.empty()) continue;

      add_outer(*g.recurrent, delta, std::span<const double>(t.own_sum).subspan(at, hd));
      std::fill(back.begin(), back.end(), 0.0);
      matvec_transposed_accumulate(*w.recurrent, delta, back);
      for (const Cell& p : preds) {
        add_into(std::span<double>(dh[m]).subspan(grids[0]->cell_index(p.i, p.j) * hd, hd), back);
      }

      if (w.transfer == nullptr) continue;
      add_outer(*g.transfer, delta, std::span<const double>(t.cross_sum).subspan(at, hd));
      if (!cross_terms) continue;
      const std::size_t other = 1 - m;
      std::fill(back.begin(), back.end(), 0.0);
      matvec_transposed_accumulate(*w.transfer, delta, back);
      for (const Cell& p : preds) {
        add_into(std::span<double>(dh[other]).subspan(grids[0]->cell_index(p.i, p.j) * hd, hd), back);
      }
    }
  }
}

std::vector<double> output_error(std::span<const double> probs, const PatchGrid& grid) {
  const auto classes = static_cast<std::size_t>(grid.num_classes());
  std::vector<double> err(grid.cell_count() * classes, 0.0);
  const std::size_t valid = grid.valid_count();
  if (valid == 0) return err;
  const double inv = 1.0 / static_cast<double>(valid);
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    const int label = grid.labels()[cell];
    if (label == kUnlabeled) continue;
    for (std::size_t b = 0; b < classes; ++b) {
      const double target = static_cast<int>(b) == label ? 1.0 : 0.0;
      err[cell * classes + b] = (probs[cell * classes + b] - target) * inv;
    }
  }
  return err;
}

double masked_nll(std::span<const double> probs, const PatchGrid& grid) {
  const auto classes = static_cast<std::size_t>(grid.num_classes());
  double sum = 0.0;
  std::size_t valid = 0;
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    const int label = grid.labels()[cell];
    if (label == kUnlabeled) continue;
    sum += std::log(std::max(probs[cell * classes + static_cast<std::size_t>(label)], 1e-300));
    ++valid;
  }
  if (valid == 0) return 0.0;
  return -sum / static_cast<double>(valid);
}

}  // namespace mmrnn::detail
