#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrnn/grid.hpp"

namespace mmrnn {

/// Parameters of the synthetic two-modality scene generator.
///
/// Each class owns a color and a depth prototype vector. For the first
/// round(ambiguity * pairs) class pairs {k, k^1} the color prototypes
/// coincide; for the same fraction of pairs {k, k^2} the depth prototypes
/// coincide. Neither modality alone separates every class, while the pair
/// of prototypes is unique per class.
struct SceneSpec {
  int height = 16;
  int width = 16;
  int num_classes = 4;
  double ambiguity = 1.0;
  double noise_sigma = 0.05;
  double unlabeled_frac = 0.0;
  std::uint64_t seed = 0;  // dataset seed: prototypes come from it, scene layouts from (seed, index)
  int color_dim = 16;
  int depth_dim = 8;
  double feature_scale = 8.0;  // standard deviation of prototype entries

  void validate() const;
};

/// Per-class prototype vectors of one dataset.
struct Prototypes {
  std::vector<std::vector<double>> color;  // [class][color_dim]
  std::vector<std::vector<double>> depth;  // [class][depth_dim]
};

Prototypes make_prototypes(const SceneSpec& spec);

// Rectangular-region label map with every class present (before unlabeling).
std::vector<int> generate_layout(const SceneSpec& spec, std::size_t scene_index);

/// Deterministic in (spec, scene_index). Features are rounded to float so the
/// binary format round-trips exactly.
GridPair generate_scene(const SceneSpec& spec, std::size_t scene_index = 0);

std::vector<GridPair> generate_dataset(const SceneSpec& spec, std::size_t count, std::size_t first_index = 0);

// ---------------------------------------------------------------------------
// Binary grid-pair format, little-endian:
//   "MMG1", u32 H, W, D_c, D_d, B,
//   H*W*D_c f32 color features (row-major cells), H*W*D_d f32 depth features,
//   H*W u8 labels (255 = unlabeled).
// Total length 24 + 4*H*W*(D_c + D_d) + H*W bytes.

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

inline constexpr std::size_t kGridHeaderBytes = 24;

std::size_t grid_file_size(int height, int width, int color_dim, int depth_dim);

std::vector<std::uint8_t> encode_grid_pair(const GridPair& pair);
GridPair decode_grid_pair(std::span<const std::uint8_t> bytes);

void write_grid_pair(const std::filesystem::path& path, const GridPair& pair);
GridPair read_grid_pair(const std::filesystem::path& path);

// Dataset directory: one grid file per scene plus manifest.txt listing the
// file names in order, one per line.
void write_dataset(const std::filesystem::path& dir, const std::vector<GridPair>& scenes);
std::vector<GridPair> read_dataset(const std::filesystem::path& dir);

// Shared little-endian file helpers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace mmrnn
