#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "longcode/checkpoint.hpp"
#include "longcode/error.hpp"

namespace longcode {
namespace {
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("longcode_ckpt_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ParameterList<float> sample_params() {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> dist(-3.0f, 3.0f);
  std::vector<float> a(6), b(4);
  for (auto& x : a) x = dist(rng);
  for (auto& x : b) x = dist(rng);
  b[0] = std::numeric_limits<float>::denorm_min();
  b[1] = -0.0f;
  return {{"layer.weight", Tensor<float>({2, 3}, a)}, {"layer.bias", Tensor<float>({4}, b)}};
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = scratch("roundtrip");
  const auto params = sample_params();
  save_tensors(dir / "m.manifest", dir / "m.bin", params);
  const auto stored = load_tensors(dir / "m.manifest", dir / "m.bin");
  ASSERT_EQ(stored.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(stored[i].name, params[i].name);
    EXPECT_EQ(stored[i].shape, params[i].tensor.shape());
    const auto src = params[i].tensor.values();
    ASSERT_EQ(stored[i].values.size(), src.size());
    for (std::size_t j = 0; j < src.size(); ++j) {
      EXPECT_EQ(std::bit_cast<std::uint32_t>(stored[i].values[j]),
                std::bit_cast<std::uint32_t>(src[j]));
    }
  }
}

TEST(Checkpoint, ManifestListsNameShapeOffset) {
  const auto dir = scratch("manifest");
  save_tensors(dir / "m.manifest", dir / "m.bin", sample_params());
  std::ifstream in(dir / "m.manifest");
  std::string header, line1, line2;
  std::getline(in, header);
  std::getline(in, line1);
  std::getline(in, line2);
  EXPECT_EQ(line1, "layer.weight 2x3 0");
  EXPECT_EQ(line2, "layer.bias 4 24");
  EXPECT_EQ(fs::file_size(dir / "m.bin"), 40u);
}

TEST(Checkpoint, BlobIsLittleEndianF32) {
  const auto dir = scratch("endian");
  const ParameterList<float> one{{"x", Tensor<float>({1}, {1.0f})}};
  save_tensors(dir / "m.manifest", dir / "m.bin", one);
  std::ifstream in(dir / "m.bin", std::ios::binary);
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  EXPECT_EQ(bytes[0], 0x00);
  EXPECT_EQ(bytes[1], 0x00);
  EXPECT_EQ(bytes[2], 0x80);
  EXPECT_EQ(bytes[3], 0x3f);
}

TEST(Checkpoint, LoadIntoCopiesByName) {
  const auto dir = scratch("into");
  const auto params = sample_params();
  save_tensors(dir / "m.manifest", dir / "m.bin", params);
  ParameterList<float> targets{{"layer.bias", Tensor<float>({4}, 0.0f)},
                               {"layer.weight", Tensor<float>({2, 3}, 0.0f)}};
  load_into(dir / "m.manifest", dir / "m.bin", targets);
  EXPECT_EQ(targets[1].tensor.at(4), params[0].tensor.at(4));
  EXPECT_EQ(targets[0].tensor.at(3), params[1].tensor.at(3));
}

TEST(Checkpoint, LoadIntoRejectsShapeAndNameMismatch) {
  const auto dir = scratch("mismatch");
  save_tensors(dir / "m.manifest", dir / "m.bin", sample_params());
  ParameterList<float> wrong_shape{{"layer.weight", Tensor<float>({3, 2}, 0.0f)},
                                   {"layer.bias", Tensor<float>({4}, 0.0f)}};
  EXPECT_THROW(load_into(dir / "m.manifest", dir / "m.bin", wrong_shape), ShapeError);
  ParameterList<float> missing{{"layer.weight", Tensor<float>({2, 3}, 0.0f)},
                               {"other", Tensor<float>({4}, 0.0f)}};
  EXPECT_THROW(load_into(dir / "m.manifest", dir / "m.bin", missing), FormatError);
}

TEST(Checkpoint, TruncatedBlobIsAFormatError) {
  const auto dir = scratch("truncated");
  save_tensors(dir / "m.manifest", dir / "m.bin", sample_params());
  fs::resize_file(dir / "m.bin", 30);
  EXPECT_THROW(load_tensors(dir / "m.manifest", dir / "m.bin"), FormatError);
}

TEST(Checkpoint, MissingFilesAreIoErrors) {
  const auto dir = scratch("missing");
  EXPECT_THROW(load_tensors(dir / "none.manifest", dir / "none.bin"), IoError);
}

}  // namespace
}  // namespace longcode
