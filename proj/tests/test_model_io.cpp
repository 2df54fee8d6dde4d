#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "mmrnn/data.hpp"
#include "mmrnn/model_io.hpp"
#include "support/oracles.hpp"

namespace mmrnn {
namespace {

MultimodalModel sample_model() {
  MultimodalModel m({3, 2, 4, 3});
  oracle::fill_uniform(m, 21, 1.0);
  return m;
}

TEST(ModelIo, RoundTripIsBitExact) {
  const MultimodalModel m = sample_model();
  const auto bytes = encode_model(m);
  EXPECT_EQ(bytes.size(), model_file_size(m.dims()));
  EXPECT_EQ(decode_model(bytes), m);
  const auto path = std::filesystem::temp_directory_path() / "mmrnn_test_model.bin";
  save_model(path, m);
  EXPECT_EQ(load_model(path), m);
}

TEST(ModelIo, HeaderLayout) {
  const auto bytes = encode_model(sample_model());
  EXPECT_EQ(std::memcmp(bytes.data(), "MMRN", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 3);
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes[16], 4);
  EXPECT_EQ(bytes[20], 3);
  // First parameter is color TL U(0,0), as f64 little-endian.
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 24, 8);
  EXPECT_EQ(first, sample_model().modality(Modality::Color).plane(Direction::TL).input(0, 0));
}

TEST(ModelIo, RejectsBadFiles) {
  const auto bytes = encode_model(sample_model());
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_model(magic), FormatError);
  auto version = bytes;
  version[4] = 2;
  EXPECT_THROW(decode_model(version), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 8);
  try {
    decode_model(truncated);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(std::to_string(bytes.size())), std::string::npos) << what;
    EXPECT_NE(what.find(std::to_string(truncated.size())), std::string::npos) << what;
  }
}

}  // namespace
}  // namespace mmrnn
