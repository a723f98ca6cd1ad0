#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "medcal/embedding_store.hpp"

namespace medcal {

enum class Metric { kEuclidean, kCosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

template <typename A, typename B>
double squared_euclidean(std::span<const A> x, std::span<const B> y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = static_cast<double>(x[j]) - static_cast<double>(y[j]);
    acc += diff * diff;
  }
  return acc;
}

/// 1 - <x,y> / (|x||y|), clamped to [0, 2]. Two zero vectors are at
/// distance 0; a zero vector and a nonzero one are at distance 1.
template <typename A, typename B>
double cosine_distance(std::span<const A> x, std::span<const B> y) {
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double a = x[j];
    const double b = y[j];
    dot += a * b;
    xx += a * a;
    yy += b * b;
  }
  if (xx == 0.0 && yy == 0.0) return 0.0;
  if (xx == 0.0 || yy == 0.0) return 1.0;
  const double d = 1.0 - dot / (std::sqrt(xx) * std::sqrt(yy));
  return d < 0.0 ? 0.0 : (d > 2.0 ? 2.0 : d);
}

template <typename A, typename B>
double distance(std::span<const A> x, std::span<const B> y, Metric metric) {
  return metric == Metric::kEuclidean ? std::sqrt(squared_euclidean(x, y))
                                      : cosine_distance(x, y);
}

inline constexpr std::size_t kDefaultPairwiseCap = 50'000;

/// Dense symmetric N x N matrix, row-major.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, std::vector<double> values)
      : n_(n), values_(std::move(values)) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * n_, n_}; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Throws CapacityExceeded when N > max_samples.
DistanceMatrix pairwise_distances(const FeatureBank& bank, Metric metric,
                                  std::size_t max_samples = kDefaultPairwiseCap);

struct Neighbor {
  std::size_t index;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

/// k nearest neighbors of every sample, self excluded, ascending by
/// distance with ties broken by lower index. Requires 1 <= k <= N-1.
std::vector<std::vector<Neighbor>> knn(const FeatureBank& bank, std::size_t k, Metric metric);

/// Largest pairwise Euclidean distance. Exact up to kExactDiameterLimit
/// samples; above that, twice the largest distance from the mean (an upper
/// bound within a factor of 2).
inline constexpr std::size_t kExactDiameterLimit = 4096;
double data_diameter(const FeatureBank& bank);

/// Coordinate-wise mean of all rows.
std::vector<double> column_means(const FeatureBank& bank);

}  // namespace medcal
