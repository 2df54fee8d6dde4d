#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mmrnn/grid.hpp"

namespace mmrnn {

/// B x B counts, rows = ground truth, columns = prediction, over valid cells.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const noexcept { return classes_; }
  std::uint64_t count(int truth, int predicted) const noexcept {
    return counts_[static_cast<std::size_t>(truth) * classes_ + predicted];
  }
  std::uint64_t total() const noexcept { return total_; }

  // Throws std::out_of_range for a class outside [0, B).
  void add(int truth, int predicted);
  // Skips invalid cells of truth.
  void accumulate(const LabelMap& predicted, const PatchGrid& truth);
  void merge(const ConfusionMatrix& other);

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int classes_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct MetricSummary {
  double pixel_acc = 0.0;
  double class_acc = 0.0;
  double mean_iou = 0.0;
  // Empty for classes absent from both truth and prediction.
  std::vector<std::optional<double>> per_class_iou;
};

// Throws std::invalid_argument when the matrix is empty. Classes with no
// ground-truth cells are left out of class_acc; classes with an empty union
// are left out of mean_iou.
MetricSummary summarize(const ConfusionMatrix& cm);

}  // namespace mmrnn
