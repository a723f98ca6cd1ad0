#pragma once

// Cold-start sample selection: turn a feature bank into a query set of M
// sample indices. Every strategy is a pure function of (bank, M, config);
// ties are always broken towards the lowest sample index.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medcal/embedding_store.hpp"
#include "medcal/geometry.hpp"
#include "medcal/kmeans.hpp"

namespace medcal {

/// Annotation budget as a fraction of the pool or an absolute count.
class Budget {
 public:
  static Budget fraction(double f) { return Budget(true, f, 0); }
  static Budget count(std::size_t m) { return Budget(false, 0.0, m); }

  bool is_fraction() const noexcept { return is_fraction_; }
  double fraction_value() const noexcept { return fraction_; }
  std::size_t count_value() const noexcept { return count_; }
  std::string to_string() const;

 private:
  Budget(bool is_fraction, double f, std::size_t m)
      : is_fraction_(is_fraction), fraction_(f), count_(m) {}

  bool is_fraction_;
  double fraction_;
  std::size_t count_;
};

/// "51" is a count; "0.02", "1.0" and "2e-2" are fractions.
Budget parse_budget(std::string_view text);

/// Fraction f -> floor(f * n_train) clamped to at least 1; counts pass
/// through. Throws BudgetOutOfRange for f outside (0, 1], a count outside
/// [1, n_train], or n_train == 0.
std::size_t resolve_budget(std::size_t n_train, const Budget& budget);

enum class StrategyKind { kRandom, kAlps, kTypiclust, kBal, kFps, kCoreset, kProbcover, kRepdiv };

std::string_view to_string(StrategyKind kind);
/// Throws UnknownStrategy.
StrategyKind parse_strategy(std::string_view name);
/// All eight strategies in canonical order.
const std::vector<StrategyKind>& all_strategies();
/// Strategies whose output does not depend on the seed.
bool is_seed_free(StrategyKind kind);

struct QuerySet {
  std::vector<std::size_t> indices;  // selection order
  std::string strategy;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;
};

/// {strategy, seed, params, indices, sample_ids}, two-space indented with a
/// trailing newline. Key order is fixed so output is byte-stable.
std::string query_set_to_json(const QuerySet& query, const FeatureBank& bank);
QuerySet query_set_from_json(std::string_view text);

struct StrategyConfig {
  Metric metric = Metric::kEuclidean;
  std::uint64_t seed = 0;
  /// Typiclust neighbor cap; the per-cluster count is min(this, size - 1).
  std::size_t typicality_knn = 20;
  std::optional<double> probcover_delta;
  double probcover_delta_quantile = 0.02;
  double repdiv_lambda = 1.0;
  bool fps_probabilistic_seeding = false;
  /// K-means settings for alps/typiclust/bal. The seed field is replaced
  /// by `seed` above.
  KMeansConfig kmeans;
};

/// Per-run details for tests and diagnostics.
struct SelectionTrace {
  std::optional<ClusterModel> clusters;
  /// Cluster of each pick (cluster strategies; npos for fallback picks).
  std::vector<std::size_t> pick_clusters;
  /// Per-pick criterion: distance to centroid (alps), typicality
  /// (typiclust), CCD (bal), min distance to the selected set
  /// (fps/coreset, +inf for the first pick), counted out-degree
  /// (probcover), greedy score (repdiv).
  std::vector<double> pick_scores;
  /// Probcover: number of covered samples after each pick.
  std::vector<std::size_t> covered_counts;
  /// Probcover: true for picks made after full coverage.
  std::vector<bool> after_full_coverage;
  double delta = 0.0;
};

inline constexpr std::size_t kNoCluster = static_cast<std::size_t>(-1);

QuerySet select_random(const FeatureBank& bank, std::size_t m, std::uint64_t seed);
QuerySet select_alps(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                     SelectionTrace* trace = nullptr);
QuerySet select_typiclust(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                          SelectionTrace* trace = nullptr);
/// Throws BudgetTooSmall for m < 2.
QuerySet select_bal(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                    SelectionTrace* trace = nullptr);
QuerySet select_fps(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                    SelectionTrace* trace = nullptr);
QuerySet select_coreset(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                        SelectionTrace* trace = nullptr);
/// Throws InvalidDelta when the resolved radius is not positive.
QuerySet select_probcover(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                          SelectionTrace* trace = nullptr);
QuerySet select_repdiv(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                       SelectionTrace* trace = nullptr);

QuerySet run_strategy(StrategyKind kind, const FeatureBank& bank, const Budget& budget,
                      const StrategyConfig& cfg, SelectionTrace* trace = nullptr);
/// Throws UnknownStrategy for names outside the eight strategies.
QuerySet run_strategy(std::string_view name, const FeatureBank& bank, const Budget& budget,
                      const StrategyConfig& cfg, SelectionTrace* trace = nullptr);

// Building blocks, exposed for reuse and testing.

/// Greedy max-min order starting at `first`: repeatedly add the sample
/// whose distance to the chosen set is largest. Returns m indices.
std::vector<std::size_t> farthest_point_order(const FeatureBank& bank, Metric metric,
                                              std::size_t first, std::size_t m,
                                              std::vector<double>* pick_distances = nullptr);

/// Sample closest to the coordinate-wise mean under `metric`.
std::size_t closest_to_mean(const FeatureBank& bank, Metric metric);

/// Linear-interpolated quantile of the off-diagonal pairwise distances.
double pairwise_distance_quantile(const FeatureBank& bank, Metric metric, double q);

/// Typicality of each member: 1 / mean distance to its K nearest fellow
/// members, K = min(knn_cap, |members| - 1); +inf when that mean is 0 or
/// for a singleton.
std::vector<double> cluster_typicality(const FeatureBank& bank,
                                       std::span<const std::size_t> members,
                                       std::size_t knn_cap, Metric metric);

/// Cluster distance difference: distance to the second-nearest centroid
/// minus distance to the nearest one.
double cluster_distance_difference(const FeatureBank& bank, const ClusterModel& model,
                                   std::size_t sample, Metric metric);

/// Shortest decimal form that round-trips the double.
std::string format_double(double value);

}  // namespace medcal
