#include <gtest/gtest.h>

#include <random>

#include "longcode/encoder_transformer.hpp"
#include "longcode/error.hpp"
#include "support/gradcheck.hpp"

namespace longcode {
namespace {

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.num_blocks = 1;
  c.hidden = 8;
  c.heads = 2;
  c.intermediate = 16;
  c.vocab_size = 10;
  c.max_positions = 4;
  c.type_vocab = 2;
  c.seg_len = 4;
  c.include_pooler = false;
  return c;
}

// Element counts of every tensor a BERT-style encoder owns, listed by hand.
std::uint64_t enumerate_parameters(const EncoderConfig& c) {
  const std::uint64_t d = c.hidden, i = c.intermediate;
  std::vector<std::uint64_t> sizes{c.vocab_size * d, c.max_positions * d, c.type_vocab * d, d, d};
  for (std::size_t b = 0; b < c.num_blocks; ++b) {
    for (int proj = 0; proj < 4; ++proj) {
      sizes.push_back(d * d);
      sizes.push_back(d);
    }
    sizes.insert(sizes.end(), {d, d, d * i, i, i * d, d, d, d});
  }
  if (c.include_pooler) sizes.insert(sizes.end(), {d * d, d});
  std::uint64_t total = 0;
  for (const auto s : sizes) total += s;
  return total;
}

TEST(CountParameters, PaperConfiguration) {
  const EncoderConfig paper;  // defaults
  EXPECT_EQ(count_parameters(paper), 9'591'040u);
}

TEST(CountParameters, DegenerateConfiguration) {
  EncoderConfig c;
  c.num_blocks = 0;
  c.vocab_size = 1;
  c.max_positions = 1;
  c.type_vocab = 1;
  c.hidden = 1;
  c.heads = 1;
  c.seg_len = 1;
  c.include_pooler = false;
  EXPECT_EQ(count_parameters(c), 5u);
}

TEST(CountParameters, MatchesEnumerationAndAllocation) {
  const EncoderConfig tiny = tiny_config();
  EXPECT_EQ(count_parameters(tiny), enumerate_parameters(tiny));
  ParamInit init(1);
  const TransformerEncoder<float> enc(tiny, init);
  EXPECT_EQ(total_size(enc.parameters()), count_parameters(tiny));

  EncoderConfig pooled = tiny;
  pooled.include_pooler = true;
  pooled.num_blocks = 2;
  ParamInit init2(2);
  const TransformerEncoder<float> enc2(pooled, init2);
  EXPECT_EQ(count_parameters(pooled), enumerate_parameters(pooled));
  EXPECT_EQ(total_size(enc2.parameters()), count_parameters(pooled));
}

TEST(EncoderConfig, Validation) {
  EncoderConfig c = tiny_config();
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = tiny_config();
  c.seg_len = 5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(EncodeSegment, OutputShape) {
  ParamInit init(3);
  const TransformerEncoder<float> enc(tiny_config(), init);
  const std::vector<TokenId> ids{1, 2, 3, 0};
  const auto out = enc.encode_segment(ids, {false, false, false, true});
  EXPECT_EQ(out.shape(), (Shape{4, 8}));
}

TEST(EncodeSegment, IdOutOfRangeThrows) {
  ParamInit init(3);
  const TransformerEncoder<float> enc(tiny_config(), init);
  const std::vector<TokenId> ids{1, 2, 10, 0};
  EXPECT_THROW(enc.encode_segment(ids, std::vector<bool>(4, false)), IndexError);
}

TEST(EncodeSegment, MaskedPadContentDoesNotLeak) {
  ParamInit init(4);
  const TransformerEncoder<float> enc(tiny_config(), init);
  const std::vector<bool> mask{false, false, true, true};
  const std::vector<TokenId> a{5, 6, 0, 0}, b{5, 6, 9, 3};
  const auto ya = enc.encode_segment(a, mask);
  const auto yb = enc.encode_segment(b, mask);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(ya.at(r, c), yb.at(r, c));
  // Swapping pad-only tail positions leaves real rows alone too.
  const std::vector<TokenId> swapped{5, 6, 3, 9};
  const auto ys = enc.encode_segment(swapped, mask);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(yb.at(r, c), ys.at(r, c));
}

TEST(EncodeSegment, AttentionRowsSumToOneOverRealKeys) {
  ParamInit init(5);
  EncoderConfig c = tiny_config();
  c.num_blocks = 2;
  const TransformerEncoder<float> enc(c, init);
  const std::vector<TokenId> ids{4, 2, 7, 0};
  const std::vector<bool> mask{false, false, false, true};
  std::vector<Tensor<float>> maps;
  enc.encode_segment(ids, mask, &maps);
  ASSERT_EQ(maps.size(), 4u);  // blocks x heads
  for (const auto& m : maps) {
    ASSERT_EQ(m.shape(), (Shape{4, 4}));
    for (std::size_t q = 0; q < 4; ++q) {
      double total = 0.0;
      for (std::size_t k = 0; k < 4; ++k) total += m.at(q, k);
      EXPECT_NEAR(total, 1.0, 1e-6);
      EXPECT_EQ(m.at(q, 3), 0.0f);
    }
  }
}

TEST(EncodeSegment, Deterministic) {
  const std::vector<TokenId> ids{1, 2, 3, 4};
  const std::vector<bool> mask(4, false);
  ParamInit i1(6), i2(6);
  const TransformerEncoder<float> e1(tiny_config(), i1), e2(tiny_config(), i2);
  const auto y1 = e1.encode_segment(ids, mask);
  const auto y2 = e2.encode_segment(ids, mask);
  EXPECT_EQ(std::vector<float>(y1.values().begin(), y1.values().end()),
            std::vector<float>(y2.values().begin(), y2.values().end()));
}

TEST(EncodeSegment, GradientOfEveryParameterGroup) {
  ParamInit init(7);
  EncoderConfig c = tiny_config();
  const TransformerEncoder<double> enc(c, init);
  // Larger-than-default weights so every path carries signal.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (auto& p : enc.parameters()) {
    if (p.name.find("ln") != std::string::npos || p.name.find("norm") != std::string::npos) continue;
    auto t = p.tensor;
    for (auto& v : t.mutable_values()) v = dist(rng);
  }
  const std::vector<TokenId> ids{3, 1, 4, 0};
  const std::vector<bool> mask{false, false, false, true};
  for (const auto& p : enc.parameters()) {
    const double err = testing::gradcheck(
        [&] { return testing::project(enc.encode_segment(ids, mask), 11); }, {p.tensor});
    EXPECT_LT(err, 1e-3) << p.name;
  }
}

}  // namespace
}  // namespace longcode
