#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmrnn/coupled.hpp"

namespace mmrnn {

/// Model file, little-endian:
///   "MMRN", u32 version (1), u32 D_c, D_d, Dh, B,
///   then every parameter as f64 in MultimodalModel::blocks() order:
///   color then depth; per modality, directions TL, TR, BL, BR each with
///   U (Dh x D_m), W (Dh x Dh), S (Dh x Dh), V (B x Dh), b (Dh), all
///   row-major; then the modality's output bias c (B).
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::size_t model_file_size(const MultimodalDims& dims);

std::vector<std::uint8_t> encode_model(const MultimodalModel& model);
// Throws FormatError on bad magic, unsupported version or wrong length.
MultimodalModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const MultimodalModel& model);
MultimodalModel load_model(const std::filesystem::path& path);

}  // namespace mmrnn
