#include <gtest/gtest.h>

#include "longcode/encoder_cnn.hpp"
#include "longcode/error.hpp"
#include "support/gradcheck.hpp"

namespace longcode {
namespace {

CnnConfig tiny_cnn(std::size_t kernel = 3) {
  CnnConfig c;
  c.embed = 4;
  c.filters = 5;
  c.kernel = kernel;
  c.max_words = 50;
  c.vocab_size = 12;
  return c;
}

TEST(CnnEncoder, OutputShapeAndParameterCount) {
  ParamInit init(1);
  const CnnEncoder<float> enc(tiny_cnn(), init);
  const std::vector<TokenId> ids{1, 2, 3, 4, 5, 6, 7};
  EXPECT_EQ(enc.encode(ids).shape(), (Shape{7, 5}));
  EXPECT_EQ(enc.output_dim(), 5u);
  EXPECT_EQ(count_parameters(tiny_cnn()), 12u * 4 + 3u * 4 * 5 + 5);
  EXPECT_EQ(total_size(enc.parameters()), count_parameters(tiny_cnn()));
}

TEST(CnnEncoder, EmptyInputThrows) {
  ParamInit init(1);
  const CnnEncoder<float> enc(tiny_cnn(), init);
  EXPECT_THROW(enc.encode(std::vector<TokenId>{}), ShapeError);
}

TEST(CnnEncoder, EvenKernelRejected) {
  EXPECT_THROW(tiny_cnn(4).validate(), ConfigError);
}

TEST(CnnEncoder, UnitKernelIsPerWordMap) {
  ParamInit init(2);
  const CnnEncoder<float> enc(tiny_cnn(1), init);
  const std::vector<TokenId> ids{3, 8, 3, 1, 8};
  const auto y = enc.encode(ids);
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_EQ(y.at(0, c), y.at(2, c));
    EXPECT_EQ(y.at(1, c), y.at(4, c));
  }
}

TEST(CnnEncoder, TranslationEquivarianceAwayFromBoundaries) {
  ParamInit init(3);
  const CnnEncoder<float> enc(tiny_cnn(3), init);
  const std::vector<TokenId> a{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<TokenId> shifted{9, 1, 2, 3, 4, 5, 6, 7, 8};
  const auto ya = enc.encode(a);
  const auto yb = enc.encode(shifted);
  // Interior rows i of `a` (1..6) see the same window as rows i+1 of `shifted`.
  for (std::size_t i = 1; i + 1 < a.size(); ++i)
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(ya.at(i, c), yb.at(i + 1, c));
}

TEST(CnnEncoder, Gradient) {
  ParamInit init(4);
  CnnConfig c = tiny_cnn(3);
  const CnnEncoder<double> enc(c, init);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (auto& p : enc.parameters()) {
    auto t = p.tensor;
    for (auto& v : t.mutable_values()) v = dist(rng);
  }
  const std::vector<TokenId> ids{2, 7, 7, 0, 11, 4};
  for (const auto& p : enc.parameters()) {
    const double err = testing::gradcheck([&] { return testing::project(enc.encode(ids), 3); },
                                          {p.tensor});
    EXPECT_LT(err, 1e-3) << p.name;
  }
}

}  // namespace
}  // namespace longcode
