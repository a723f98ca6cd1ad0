#include <gtest/gtest.h>

#include <random>

#include "medcal/geometry.hpp"
#include "medcal/kmeans.hpp"
#include "oracles.hpp"

using namespace medcal;

TEST(KMeans, KEqualsNGivesZeroInertia) {
  std::mt19937_64 gen(1);
  const auto bank = oracle::random_bank(gen, 7, 3);
  const auto model = kmeans(bank, 7);
  EXPECT_EQ(model.inertia, 0.0);
  for (std::size_t i = 0; i < 7; ++i) {
    const auto c = model.centroid(model.assignments[i]);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(c[j], bank.row(i)[j]);
  }
  EXPECT_FALSE(model.degenerate);
}

TEST(KMeans, SingleClusterIsTheMean) {
  const auto bank = FeatureBank::from_rows({{0, 0}, {2, 0}, {4, 6}});
  const auto model = kmeans(bank, 1);
  EXPECT_NEAR(model.centroids[0], 2.0, 1e-12);
  EXPECT_NEAR(model.centroids[1], 2.0, 1e-12);
  // Total variance times N: (4+0+4) + (4+4+16).
  EXPECT_NEAR(model.inertia, 32.0, 1e-9);
}

TEST(KMeans, TwoSeparatedPairs) {
  const auto bank = FeatureBank::from_rows({{0, 0}, {0.1f, 0}, {10, 0}, {10.1f, 0}});
  const auto model = kmeans(bank, 2);
  std::vector<double> xs{model.centroids[0], model.centroids[2]};
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(xs[0], 0.05, 1e-6);
  EXPECT_NEAR(xs[1], 10.05, 1e-6);
  EXPECT_NEAR(model.centroids[1], 0.0, 1e-6);
  EXPECT_NEAR(model.inertia, oracle::exhaustive_kmeans_optimum(bank, 2), 1e-9);
}

TEST(KMeans, InvalidK) {
  const auto bank = FeatureBank::from_rows({{0}, {1}});
  for (std::size_t k : {std::size_t{0}, std::size_t{3}}) {
    try {
      kmeans(bank, k);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidK);
    }
  }
}

TEST(KMeans, FewerDistinctPointsThanKMarksCollapsedClusters) {
  const auto bank = FeatureBank::from_rows({{1, 1}, {1, 1}, {1, 1}, {5, 5}});
  const auto model = kmeans(bank, 3);
  EXPECT_TRUE(model.degenerate);
  std::size_t collapsed = 0;
  for (bool c : model.collapsed) collapsed += c;
  EXPECT_EQ(collapsed, 1u);
  const auto members = model.members();
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(members[c].empty(), model.collapsed[c]);
  EXPECT_EQ(model.inertia, 0.0);
}

TEST(KMeans, InertiaNonIncreasingPerIteration) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 60; ++t) {
    const auto bank = oracle::random_bank(gen, 5 + gen() % 60, 1 + gen() % 5);
    const std::size_t k = 1 + gen() % 6;
    KMeansConfig cfg;
    cfg.seed = gen();
    for (std::size_t r = 0; r < 3; ++r) {
      const auto model = kmeans_run(bank, k, cfg, r);
      for (std::size_t i = 1; i < model.inertia_history.size(); ++i) {
        EXPECT_LE(model.inertia_history[i], model.inertia_history[i - 1] * (1 + 1e-12) + 1e-12);
      }
      EXPECT_NEAR(model.inertia, compute_inertia(bank, model), 1e-6 * (1 + model.inertia));
    }
  }
}

TEST(KMeans, RestartsReturnTheBestRun) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 20; ++t) {
    const auto bank = oracle::random_bank(gen, 30, 2);
    KMeansConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.n_restarts = 4;
    const auto best = kmeans(bank, 4, cfg);
    cfg.tol = best.tol_used;
    double min_run = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < 4; ++r) min_run = std::min(min_run, kmeans_run(bank, 4, cfg, r).inertia);
    EXPECT_EQ(best.inertia, min_run);
  }
}

TEST(KMeans, DeterministicPerSeed) {
  std::mt19937_64 gen(4);
  const auto bank = oracle::random_bank(gen, 50, 4);
  KMeansConfig cfg;
  cfg.seed = 9;
  const auto a = kmeans(bank, 5, cfg);
  const auto b = kmeans(bank, 5, cfg);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(KMeans, WithinFivePercentOfExhaustiveOptimum) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 3 + gen() % 6;
    const std::size_t k = 1 + gen() % std::min<std::size_t>(3, n);
    const auto bank = oracle::random_bank(gen, n, 1 + gen() % 3);
    KMeansConfig cfg;
    cfg.seed = gen();
    const double got = kmeans(bank, k, cfg).inertia;
    const double opt = oracle::exhaustive_kmeans_optimum(bank, k);
    EXPECT_LE(got, opt * 1.05 + 1e-9) << "n=" << n << " k=" << k;
  }
}
