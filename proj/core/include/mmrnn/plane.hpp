#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmrnn {

/// Everything one scan direction of one modality leaves behind for BPTT.
/// Each buffer is H*W*Dh, cell-major in row-major cell order.
struct PlaneTrace {
  int hidden_dim = 0;
  std::vector<double> own_sum;    // h(vertical pred) + h(horizontal pred), own modality
  std::vector<double> cross_sum;  // same sum over the other modality; empty when uncoupled
  std::vector<double> pre;
  std::vector<double> hidden;

  std::span<const double> hidden_at(std::size_t cell) const noexcept {
    return std::span<const double>(hidden).subspan(cell * hidden_dim, hidden_dim);
  }
  std::span<const double> pre_at(std::size_t cell) const noexcept {
    return std::span<const double>(pre).subspan(cell * hidden_dim, hidden_dim);
  }
};

}  // namespace mmrnn
