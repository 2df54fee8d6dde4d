#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mmrnn {

/// Scan direction, named by the corner the scan starts from.
enum class Direction : std::uint8_t { TL, TR, BL, BR };

inline constexpr std::array<Direction, 4> kDirections{Direction::TL, Direction::TR, Direction::BL,
                                                      Direction::BR};

constexpr std::size_t index_of(Direction d) noexcept { return static_cast<std::size_t>(d); }
std::string_view to_string(Direction d) noexcept;

// Row offset of the vertical predecessor (-1 above, +1 below) and column
// offset of the horizontal predecessor (-1 left, +1 right).
constexpr int row_offset(Direction d) noexcept {
  return d == Direction::TL || d == Direction::TR ? -1 : +1;
}
constexpr int col_offset(Direction d) noexcept {
  return d == Direction::TL || d == Direction::BL ? -1 : +1;
}

// Left-right mirror: TL<->TR, BL<->BR.
constexpr Direction mirror_lr(Direction d) noexcept {
  switch (d) {
    case Direction::TL: return Direction::TR;
    case Direction::TR: return Direction::TL;
    case Direction::BL: return Direction::BR;
    case Direction::BR: return Direction::BL;
  }
  return d;
}

struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// In-bounds predecessors of a cell; vertical first, then horizontal.
struct Predecessors {
  std::array<Cell, 2> cells{};
  int count = 0;

  const Cell* begin() const noexcept { return cells.data(); }
  const Cell* end() const noexcept { return cells.data() + count; }
  bool empty() const noexcept { return count == 0; }
};

/// Topological order of the H x W lattice under d: rows from the starting
/// corner's side, columns likewise.
std::vector<Cell> scan_order(Direction d, int height, int width);
Predecessors predecessors(Direction d, int i, int j, int height, int width);

inline constexpr int kUnlabeled = -1;
inline constexpr std::uint8_t kUnlabeledByte = 255;

/// One modality's H x W lattice of patch features with class labels.
/// A cell is valid exactly when it carries a label.
class PatchGrid {
 public:
  PatchGrid() = default;
  // Zero features, every cell unlabeled.
  PatchGrid(int height, int width, int feat_dim, int num_classes);
  PatchGrid(int height, int width, int feat_dim, int num_classes, std::vector<double> features,
            std::vector<int> labels);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int feat_dim() const noexcept { return feat_dim_; }
  int num_classes() const noexcept { return num_classes_; }
  std::size_t cell_count() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t cell_index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * width_ + j;
  }

  std::span<const double> feature(int i, int j) const noexcept {
    return std::span<const double>(features_).subspan(cell_index(i, j) * feat_dim_, feat_dim_);
  }
  int label(int i, int j) const noexcept { return labels_[cell_index(i, j)]; }
  bool valid(int i, int j) const noexcept { return label(i, j) != kUnlabeled; }
  std::size_t valid_count() const noexcept;

  const std::vector<double>& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  PatchGrid with_labels(std::vector<int> labels) const;
  PatchGrid with_features(std::vector<double> features, int feat_dim) const;

  bool operator==(const PatchGrid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int feat_dim_ = 0;
  int num_classes_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

/// A color/depth pair over the same lattice.
struct GridPair {
  PatchGrid color;
  PatchGrid depth;
  bool operator==(const GridPair&) const = default;
};

// Throws std::invalid_argument unless both grids share H, W, B and validity.
void require_aligned(const PatchGrid& a, const PatchGrid& b);

PatchGrid flip_lr(const PatchGrid& g);
// Per-cell feature concatenation [a; b]; labels taken from a.
PatchGrid concat_features(const PatchGrid& a, const PatchGrid& b);

/// H x W x B lattice of per-cell class scores.
struct ProbMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  ProbMap() = default;
  ProbMap(int h, int w, int c) : height(h), width(w), channels(c), values(static_cast<std::size_t>(h) * w * c) {}

  std::span<double> at(int i, int j) noexcept {
    return std::span<double>(values).subspan((static_cast<std::size_t>(i) * width + j) * channels, channels);
  }
  std::span<const double> at(int i, int j) const noexcept {
    return std::span<const double>(values).subspan((static_cast<std::size_t>(i) * width + j) * channels,
                                                   channels);
  }
};

struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<int> labels;

  int at(int i, int j) const noexcept { return labels[static_cast<std::size_t>(i) * width + j]; }
  bool operator==(const LabelMap&) const = default;
};

}  // namespace mmrnn
