#include <gtest/gtest.h>

#include <random>

#include "medcal/geometry.hpp"
#include "oracles.hpp"

using namespace medcal;

TEST(PairwiseDistances, TwoPointsOnALine) {
  const auto m = pairwise_distances(FeatureBank::from_rows({{0}, {3}}), Metric::kEuclidean);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 3.0);
  EXPECT_EQ(m(1, 0), 3.0);
  EXPECT_EQ(m(1, 1), 0.0);
}

TEST(PairwiseDistances, IdenticalRowsGiveZeroMatrix) {
  for (Metric metric : {Metric::kEuclidean, Metric::kCosine}) {
    const auto m =
        pairwise_distances(FeatureBank::from_rows({{1, 2}, {1, 2}, {1, 2}}), metric);
    for (double v : m.values()) EXPECT_NEAR(v, 0.0, 1e-7);
  }
}

TEST(PairwiseDistances, MatchesNaiveLoop) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const auto bank = oracle::random_bank(gen, t == 0 ? 5 : 2 + gen() % 20, 1 + gen() % 6);
    for (Metric metric : {Metric::kEuclidean, Metric::kCosine}) {
      const auto m = pairwise_distances(bank, metric);
      const auto ref = oracle::naive_pairwise(bank, metric);
      for (std::size_t i = 0; i < bank.n_samples(); ++i) {
        EXPECT_NEAR(m(i, i), 0.0, 1e-7);
        for (std::size_t j = 0; j < bank.n_samples(); ++j) {
          EXPECT_NEAR(m(i, j), m(j, i), 1e-6);
          EXPECT_NEAR(m(i, j), ref[i][j], 1e-5 * std::max(1.0, ref[i][j]));
        }
      }
    }
  }
}

TEST(PairwiseDistances, CapIsEnforced) {
  const auto bank = FeatureBank::from_rows({{0}, {1}, {2}});
  try {
    pairwise_distances(bank, Metric::kEuclidean, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapacityExceeded);
  }
}

TEST(CosineDistance, ZeroVectorConvention) {
  const std::vector<float> zero{0, 0}, one{1, 0}, minus{-1, 0};
  EXPECT_EQ((cosine_distance<float, float>(zero, zero)), 0.0);
  EXPECT_EQ((cosine_distance<float, float>(zero, one)), 1.0);
  EXPECT_NEAR((cosine_distance<float, float>(one, minus)), 2.0, 1e-12);
}

TEST(Knn, LineExample) {
  const auto nn = knn(FeatureBank::from_rows({{0}, {1}, {10}}), 1, Metric::kEuclidean);
  EXPECT_EQ(nn[0][0], (Neighbor{1, 1.0}));
  EXPECT_EQ(nn[1][0], (Neighbor{0, 1.0}));
  EXPECT_EQ(nn[2][0], (Neighbor{1, 9.0}));
}

TEST(Knn, FullRowWhenKIsNMinusOne) {
  std::mt19937_64 gen(4);
  const auto bank = oracle::random_bank(gen, 9, 3);
  const auto nn = knn(bank, 8, Metric::kEuclidean);
  const auto ref = oracle::naive_pairwise(bank, Metric::kEuclidean);
  for (std::size_t i = 0; i < 9; ++i) {
    ASSERT_EQ(nn[i].size(), 8u);
    for (std::size_t t = 1; t < 8; ++t) EXPECT_LE(nn[i][t - 1].distance, nn[i][t].distance);
    for (const auto& nb : nn[i]) {
      EXPECT_NE(nb.index, i);
      EXPECT_NEAR(nb.distance, ref[i][nb.index], 1e-9);
    }
  }
}

TEST(Knn, InvalidK) {
  const auto bank = FeatureBank::from_rows({{0}, {1}, {10}});
  for (std::size_t k : {std::size_t{0}, std::size_t{3}}) {
    try {
      knn(bank, k, Metric::kEuclidean);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidK);
    }
  }
}

TEST(Knn, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 100; ++t) {
    // Coarse integer grid forces distance ties so the index rule matters.
    const std::size_t n = 3 + gen() % 25;
    std::vector<std::vector<float>> rows(n, std::vector<float>(2));
    for (auto& r : rows) {
      for (auto& v : r) v = static_cast<float>(gen() % 4);
    }
    const auto bank = FeatureBank::from_rows(rows);
    const std::size_t k = 1 + gen() % (n - 1);
    for (Metric metric : {Metric::kEuclidean, Metric::kCosine}) {
      const auto nn = knn(bank, k, metric);
      const auto ref = oracle::brute_knn_indices(bank, k, metric);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> got;
        for (const auto& nb : nn[i]) got.push_back(nb.index);
        EXPECT_EQ(got, ref[i]) << "instance " << t << " row " << i;
      }
    }
  }
}

TEST(DataDiameter, ExactForSmallBanks) {
  EXPECT_DOUBLE_EQ(data_diameter(FeatureBank::from_rows({{0, 0}, {3, 4}, {1, 1}})), 5.0);
}

TEST(ParseMetric, Names) {
  EXPECT_EQ(parse_metric("euclidean"), Metric::kEuclidean);
  EXPECT_EQ(parse_metric("cosine"), Metric::kCosine);
  EXPECT_THROW(parse_metric("manhattan"), Error);
}
