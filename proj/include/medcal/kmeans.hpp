#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "medcal/embedding_store.hpp"

namespace medcal {

struct KMeansConfig {
  std::uint64_t seed = 0;
  std::size_t max_iters = 300;
  /// Absolute stopping tolerance on the largest centroid displacement.
  /// When unset, tol_fraction * data_diameter(bank) is used.
  std::optional<double> tol;
  double tol_fraction = 1e-4;
  std::size_t n_restarts = 5;
};

/// Result of Lloyd's algorithm under squared Euclidean distance.
///
/// `collapsed[c]` marks clusters left empty because the data has fewer
/// distinct points than k; their centroid coincides with another one.
/// Every other cluster has at least one member.
struct ClusterModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k x dim, row-major
  std::vector<std::size_t> assignments;
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  bool converged = false;
  bool degenerate = false;
  std::vector<bool> collapsed;
  /// Inertia after each Lloyd iteration of the returned run.
  std::vector<double> inertia_history;
  double tol_used = 0.0;
  std::size_t restart = 0;

  std::span<const double> centroid(std::size_t c) const noexcept {
    return {centroids.data() + c * dim, dim};
  }
  /// Member indices per cluster, ascending.
  std::vector<std::vector<std::size_t>> members() const;
};

/// One seeded k-means++ / Lloyd run. Restart r draws from
/// Rng(cfg.seed, kRestartStreamBase + r).
inline constexpr std::uint64_t kRestartStreamBase = 1000;
ClusterModel kmeans_run(const FeatureBank& bank, std::size_t k, const KMeansConfig& cfg,
                        std::size_t restart);

/// Best of cfg.n_restarts runs by inertia (ties: lowest restart).
/// Throws InvalidK unless 1 <= k <= N.
ClusterModel kmeans(const FeatureBank& bank, std::size_t k, const KMeansConfig& cfg = {});

/// Sum of squared distances from each sample to its assigned centroid.
double compute_inertia(const FeatureBank& bank, const ClusterModel& model);

}  // namespace medcal
