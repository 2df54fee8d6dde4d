#include <gtest/gtest.h>

#include <algorithm>

#include "mmrnn/random.hpp"
#include "mmrnn/upsample.hpp"

namespace mmrnn {
namespace {

ProbMap random_probs(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  ProbMap m(h, w, c);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      auto cell = m.at(i, j);
      double sum = 0.0;
      for (double& x : cell) sum += (x = rng.uniform() + 1e-3);
      for (double& x : cell) x /= sum;
    }
  }
  return m;
}

TEST(Upsample, TwoByTwoToThreeByThree) {
  ProbMap m(2, 2, 1);
  m.values = {0, 1, 2, 3};
  const ProbMap up = bilinear_upsample(m, 3, 3);
  const std::vector<double> expected{0, 0.5, 1, 1, 1.5, 2, 2, 2.5, 3};
  ASSERT_EQ(up.values.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(up.values[k], expected[k], 1e-15);
}

TEST(Upsample, IdentityAndConstant) {
  const ProbMap m = random_probs(3, 4, 3, 1);
  EXPECT_EQ(bilinear_upsample(m, 3, 4).values, m.values);
  ProbMap c(2, 3, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      c.at(i, j)[0] = 0.3;
      c.at(i, j)[1] = 0.7;
    }
  }
  const ProbMap up = bilinear_upsample(c, 7, 11);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 11; ++j) {
      EXPECT_NEAR(up.at(i, j)[0], 0.3, 1e-15);
      EXPECT_NEAR(up.at(i, j)[1], 0.7, 1e-15);
    }
  }
}

TEST(Upsample, TargetSmallerIsAnError) {
  EXPECT_THROW(bilinear_upsample(ProbMap(3, 3, 2), 2, 5), std::invalid_argument);
  EXPECT_THROW(bilinear_upsample(ProbMap(3, 3, 2), 5, 2), std::invalid_argument);
}

TEST(Upsample, ConvexAndNormalized) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int h = 2 + static_cast<int>(seed % 3), w = 2 + static_cast<int>(seed % 4);
    const ProbMap m = random_probs(h, w, 4, seed);
    const int th = h * 3 + 1, tw = w * 2 + 3;
    const ProbMap up = bilinear_upsample(m, th, tw);
    for (int i = 0; i < th; ++i) {
      for (int j = 0; j < tw; ++j) {
        const double y = static_cast<double>(i) * (h - 1) / (th - 1);
        const double x = static_cast<double>(j) * (w - 1) / (tw - 1);
        const int i0 = std::min(static_cast<int>(y), h - 1), j0 = std::min(static_cast<int>(x), w - 1);
        const int i1 = std::min(i0 + 1, h - 1), j1 = std::min(j0 + 1, w - 1);
        double sum = 0.0;
        for (int k = 0; k < 4; ++k) {
          const double v = up.at(i, j)[k];
          const double lo = std::min({m.at(i0, j0)[k], m.at(i0, j1)[k], m.at(i1, j0)[k], m.at(i1, j1)[k]});
          const double hi = std::max({m.at(i0, j0)[k], m.at(i0, j1)[k], m.at(i1, j0)[k], m.at(i1, j1)[k]});
          EXPECT_GE(v, lo - 1e-15);
          EXPECT_LE(v, hi + 1e-15);
          sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
    }
  }
}

TEST(Argmax, Examples) {
  ProbMap onehot(1, 3, 3);
  onehot.values = {0, 0, 1, 1, 0, 0, 0, 1, 0};
  EXPECT_EQ(argmax_map(onehot).labels, (std::vector<int>{2, 0, 1}));
  ProbMap uniform(2, 2, 4);
  std::fill(uniform.values.begin(), uniform.values.end(), 0.25);
  EXPECT_EQ(argmax_map(uniform).labels, (std::vector<int>{0, 0, 0, 0}));
  ProbMap mixed(2, 1, 2);
  mixed.values = {0.2, 0.8, 0.9, 0.1};
  EXPECT_EQ(argmax_map(mixed).labels, (std::vector<int>{1, 0}));
}

}  // namespace
}  // namespace mmrnn
