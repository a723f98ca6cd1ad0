#include "medcal/geometry.hpp"

#include <algorithm>
#include <string>

namespace medcal {

std::string_view to_string(Metric metric) {
  return metric == Metric::kEuclidean ? "euclidean" : "cosine";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "cosine" || name == "cosine_distance") return Metric::kCosine;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

DistanceMatrix pairwise_distances(const FeatureBank& bank, Metric metric,
                                  std::size_t max_samples) {
  const std::size_t n = bank.n_samples();
  if (n > max_samples) {
    throw Error(ErrorCode::kCapacityExceeded,
                std::to_string(n) + " samples exceed the pairwise cap of " +
                    std::to_string(max_samples));
  }
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = bank.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(xi, bank.row(j), metric);
      values[i * n + j] = d;
      values[j * n + i] = d;
    }
  }
  return DistanceMatrix(n, std::move(values));
}

std::vector<std::vector<Neighbor>> knn(const FeatureBank& bank, std::size_t k, Metric metric) {
  const std::size_t n = bank.n_samples();
  if (k < 1 || k + 1 > n) {
    throw Error(ErrorCode::kInvalidK, "k=" + std::to_string(k) + " outside [1, " +
                                          std::to_string(n == 0 ? 0 : n - 1) + "]");
  }
  std::vector<std::vector<Neighbor>> out(n);
  std::vector<Neighbor> row;
  row.reserve(n - 1);
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back({j, distance(bank.row(i), bank.row(j), metric)});
    }
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(),
                      closer);
    out[i].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

std::vector<double> column_means(const FeatureBank& bank) {
  std::vector<double> mean(bank.dim(), 0.0);
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    const auto x = bank.row(i);
    for (std::size_t j = 0; j < bank.dim(); ++j) mean[j] += x[j];
  }
  if (bank.n_samples() > 0) {
    for (double& m : mean) m /= static_cast<double>(bank.n_samples());
  }
  return mean;
}

double data_diameter(const FeatureBank& bank) {
  const std::size_t n = bank.n_samples();
  if (n <= kExactDiameterLimit) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        best = std::max(best, squared_euclidean(bank.row(i), bank.row(j)));
      }
    }
    return std::sqrt(best);
  }
  const auto mean = column_means(bank);
  const std::span<const double> mean_view(mean);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    best = std::max(best, squared_euclidean(bank.row(i), mean_view));
  }
  return 2.0 * std::sqrt(best);
}

}  // namespace medcal
