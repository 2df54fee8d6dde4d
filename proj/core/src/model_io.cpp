#include "mmrnn/model_io.hpp"

#include <bit>
#include <cstring>
#include <string>
#include <string_view>

#include "mmrnn/data.hpp"

namespace mmrnn {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[at + k]) << (8 * k);
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[at + k]) << (8 * k);
  return v;
}

constexpr std::size_t kHeader = 24;

std::size_t parameter_count(const MultimodalDims& dims) {
  const auto h = static_cast<std::size_t>(dims.hidden_dim);
  const auto b = static_cast<std::size_t>(dims.num_classes);
  std::size_t n = 0;
  for (int input : {dims.color_dim, dims.depth_dim}) {
    n += 4 * (h * static_cast<std::size_t>(input) + 2 * h * h + b * h + h) + b;
  }
  return n;
}

}  // namespace

std::size_t model_file_size(const MultimodalDims& dims) { return kHeader + 8 * parameter_count(dims); }

std::vector<std::uint8_t> encode_model(const MultimodalModel& model) {
  const MultimodalDims& dims = model.dims();
  std::vector<std::uint8_t> out;
  out.reserve(model_file_size(dims));
  for (char ch : std::string_view("MMRN")) out.push_back(static_cast<std::uint8_t>(ch));
  put_u32(out, kModelFormatVersion);
  for (int v : {dims.color_dim, dims.depth_dim, dims.hidden_dim, dims.num_classes}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  for (const auto& block : model.blocks()) {
    for (double x : block.values) put_u64(out, std::bit_cast<std::uint64_t>(x));
  }
  return out;
}

MultimodalModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader) {
    throw FormatError("truncated model header: expected at least 24 bytes, got " + std::to_string(bytes.size()),
                      bytes.size());
  }
  if (std::memcmp(bytes.data(), "MMRN", 4) != 0) throw FormatError("bad magic, expected MMRN", 0);
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model version " + std::to_string(version), 4);
  }
  std::uint32_t raw[4];
  for (int k = 0; k < 4; ++k) {
    raw[k] = get_u32(bytes, 8 + 4 * static_cast<std::size_t>(k));
    if (raw[k] == 0 || raw[k] > (1u << 16)) {
      throw FormatError("model dimension out of range: " + std::to_string(raw[k]), 8 + 4 * static_cast<std::size_t>(k));
    }
  }
  const MultimodalDims dims{static_cast<int>(raw[0]), static_cast<int>(raw[1]), static_cast<int>(raw[2]),
                            static_cast<int>(raw[3])};
  const std::size_t expected = model_file_size(dims);
  if (bytes.size() != expected) {
    throw FormatError("model length mismatch: expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()),
                      std::min(bytes.size(), expected));
  }
  MultimodalModel model(dims);
  std::size_t at = kHeader;
  for (auto& block : model.blocks()) {
    for (double& x : block.values) {
      x = std::bit_cast<double>(get_u64(bytes, at));
      at += 8;
    }
  }
  return model;
}

void save_model(const std::filesystem::path& path, const MultimodalModel& model) {
  write_file_bytes(path, encode_model(model));
}

MultimodalModel load_model(const std::filesystem::path& path) {
  try {
    return decode_model(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

}  // namespace mmrnn
