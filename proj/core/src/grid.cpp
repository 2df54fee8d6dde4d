#include "mmrnn/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mmrnn {

std::string_view to_string(Direction d) noexcept {
  switch (d) {
    case Direction::TL: return "TL";
    case Direction::TR: return "TR";
    case Direction::BL: return "BL";
    case Direction::BR: return "BR";
  }
  return "?";
}

std::vector<Cell> scan_order(Direction d, int height, int width) {
  std::vector<Cell> order;
  order.reserve(static_cast<std::size_t>(height) * width);
  const bool down = row_offset(d) < 0;
  const bool rightward = col_offset(d) < 0;
  for (int r = 0; r < height; ++r) {
    const int i = down ? r : height - 1 - r;
    for (int c = 0; c < width; ++c) {
      const int j = rightward ? c : width - 1 - c;
      order.push_back({i, j});
    }
  }
  return order;
}

Predecessors predecessors(Direction d, int i, int j, int height, int width) {
  Predecessors p;
  const int pi = i + row_offset(d);
  const int pj = j + col_offset(d);
  if (pi >= 0 && pi < height) p.cells[p.count++] = {pi, j};
  if (pj >= 0 && pj < width) p.cells[p.count++] = {i, pj};
  return p;
}

PatchGrid::PatchGrid(int height, int width, int feat_dim, int num_classes)
    : PatchGrid(height, width, feat_dim, num_classes,
                std::vector<double>(static_cast<std::size_t>(height) * width * feat_dim, 0.0),
                std::vector<int>(static_cast<std::size_t>(height) * width, kUnlabeled)) {}

PatchGrid::PatchGrid(int height, int width, int feat_dim, int num_classes, std::vector<double> features,
                     std::vector<int> labels)
    : height_(height),
      width_(width),
      feat_dim_(feat_dim),
      num_classes_(num_classes),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (height < 1 || width < 1 || feat_dim < 1) {
    throw std::invalid_argument("PatchGrid: dimensions must be positive");
  }
  if (num_classes < 2) throw std::invalid_argument("PatchGrid: need at least 2 classes");
  if (features_.size() != cell_count() * feat_dim_) {
    throw std::invalid_argument("PatchGrid: expected " + std::to_string(cell_count() * feat_dim_) +
                                " feature values, got " + std::to_string(features_.size()));
  }
  if (labels_.size() != cell_count()) {
    throw std::invalid_argument("PatchGrid: expected " + std::to_string(cell_count()) + " labels, got " +
                                std::to_string(labels_.size()));
  }
  for (int label : labels_) {
    if (label != kUnlabeled && (label < 0 || label >= num_classes_)) {
      throw std::invalid_argument("PatchGrid: label " + std::to_string(label) + " outside [0," +
                                  std::to_string(num_classes_) + ")");
    }
  }
}

std::size_t PatchGrid::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(),
                                                [](int l) { return l != kUnlabeled; }));
}

PatchGrid PatchGrid::with_labels(std::vector<int> labels) const {
  return PatchGrid(height_, width_, feat_dim_, num_classes_, features_, std::move(labels));
}

PatchGrid PatchGrid::with_features(std::vector<double> features, int feat_dim) const {
  return PatchGrid(height_, width_, feat_dim, num_classes_, std::move(features), labels_);
}

void require_aligned(const PatchGrid& a, const PatchGrid& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw std::invalid_argument("grid shapes differ: " + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()));
  }
  if (a.num_classes() != b.num_classes()) throw std::invalid_argument("grid class counts differ");
  for (std::size_t k = 0; k < a.cell_count(); ++k) {
    if ((a.labels()[k] == kUnlabeled) != (b.labels()[k] == kUnlabeled)) {
      throw std::invalid_argument("grid validity masks differ at cell " + std::to_string(k));
    }
  }
}

PatchGrid flip_lr(const PatchGrid& g) {
  std::vector<double> features(g.features().size());
  std::vector<int> labels(g.cell_count());
  const auto d = static_cast<std::size_t>(g.feat_dim());
  for (int i = 0; i < g.height(); ++i) {
    for (int j = 0; j < g.width(); ++j) {
      const std::size_t dst = g.cell_index(i, g.width() - 1 - j);
      const auto src = g.feature(i, j);
      std::copy(src.begin(), src.end(), features.begin() + static_cast<std::ptrdiff_t>(dst * d));
      labels[dst] = g.label(i, j);
    }
  }
  return PatchGrid(g.height(), g.width(), g.feat_dim(), g.num_classes(), std::move(features), std::move(labels));
}

PatchGrid concat_features(const PatchGrid& a, const PatchGrid& b) {
  require_aligned(a, b);
  const int dim = a.feat_dim() + b.feat_dim();
  std::vector<double> features;
  features.reserve(a.cell_count() * dim);
  for (int i = 0; i < a.height(); ++i) {
    for (int j = 0; j < a.width(); ++j) {
      const auto fa = a.feature(i, j);
      const auto fb = b.feature(i, j);
      features.insert(features.end(), fa.begin(), fa.end());
      features.insert(features.end(), fb.begin(), fb.end());
    }
  }
  return a.with_features(std::move(features), dim);
}

}  // namespace mmrnn
