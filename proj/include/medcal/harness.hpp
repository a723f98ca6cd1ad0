#pragma once

// Desk-scale benchmark: synthetic labeled feature banks, selection
// diagnostics, strategy x budget x seed grids and report tables.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medcal/embedding_store.hpp"
#include "medcal/geometry.hpp"
#include "medcal/strategies.hpp"

namespace medcal {

struct SyntheticSpec {
  std::size_t n_classes = 10;
  std::size_t samples_per_class = 100;
  std::size_t dim = 32;
  /// Distance between the closest pair of class means, in units of
  /// within_class_sd.
  double class_separation = 4.0;
  double within_class_sd = 1.0;
  std::uint64_t seed = 0;
};

struct LabeledBank {
  FeatureBank bank;
  std::vector<std::size_t> labels;
};

/// Isotropic Gaussian mixture. Class means are drawn from N(0, I) with
/// Rng(seed, 1) and rescaled so the closest pair sits exactly
/// class_separation * within_class_sd apart; a single class sits at the
/// origin. Samples come from Rng(seed, 2 + sample_stream), class-major row
/// order. Stream 0 is the training pool; other streams give independent
/// draws around the same means (e.g. a test set).
LabeledBank generate_mixture(const SyntheticSpec& spec, std::uint64_t sample_stream = 0);

/// 1-nearest-neighbor accuracy on the test set using only the queried
/// training samples as labeled references; ties go to the lowest index.
double proxy_eval(const FeatureBank& train_bank, std::span<const std::size_t> train_labels,
                  const QuerySet& query, const FeatureBank& test_bank,
                  std::span<const std::size_t> test_labels,
                  Metric metric = Metric::kEuclidean);

struct CoverageMetrics {
  double covering_radius = 0.0;
  double mean_min_distance = 0.0;
};

CoverageMetrics coverage_metrics(const FeatureBank& bank, const QuerySet& query,
                                 Metric metric = Metric::kEuclidean);

struct ClassBalance {
  std::size_t class_coverage = 0;
  /// Shannon entropy (natural log) of the queried label histogram.
  double class_entropy = 0.0;
};

ClassBalance class_balance(std::span<const std::size_t> labels, const QuerySet& query);

/// Fraction of queried samples flagged as foreground.
double foreground_fraction(const std::vector<bool>& foreground, const QuerySet& query);

struct EvalRow {
  std::string strategy;
  double budget_fraction = 0.0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double proxy_accuracy = 0.0;
  double covering_radius = 0.0;
  double mean_min_distance = 0.0;
  std::size_t class_coverage = 0;
  double class_entropy = 0.0;
  std::optional<double> foreground_fraction;

  bool operator==(const EvalRow&) const = default;
};

/// Means over seeds for one (strategy, budget) cell.
struct AggregateRow {
  std::string strategy;
  double budget_fraction = 0.0;
  std::size_t m = 0;
  std::size_t n_seeds = 0;
  double proxy_accuracy = 0.0;
  double covering_radius = 0.0;
  double mean_min_distance = 0.0;
  double class_coverage = 0.0;
  double class_entropy = 0.0;
  std::optional<double> foreground_fraction;

  bool operator==(const AggregateRow&) const = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // strategy-major, then budget, then seed
  std::vector<AggregateRow> aggregates;

  bool operator==(const EvalReport&) const = default;
};

struct BenchmarkOptions {
  /// Base strategy settings; the seed field is replaced per grid cell.
  StrategyConfig strategy;
  /// Worker threads for grid cells; 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

/// Runs every (strategy, budget, seed) cell on generate_mixture(spec, 0),
/// evaluating with a test draw generate_mixture(spec, 1). Row order follows
/// the grid, not completion order. Errors are rethrown with their cell.
EvalReport benchmark_matrix(const SyntheticSpec& spec, const std::vector<StrategyKind>& strategies,
                            const std::vector<double>& budgets,
                            const std::vector<std::uint64_t>& seeds,
                            const BenchmarkOptions& options = {});

/// Per-(strategy, budget) means over seeds, in first-seen order.
std::vector<AggregateRow> aggregate_rows(const std::vector<EvalRow>& rows);

enum class ReportFormat { kCsv, kJson, kMarkdown };

ReportFormat parse_report_format(std::string_view name);

inline constexpr std::string_view kReportCsvHeader =
    "strategy,budget_fraction,M,seed,proxy_accuracy,covering_radius,mean_min_distance,"
    "class_coverage,class_entropy,foreground_fraction";

/// Raw rows then aggregates (seed column "mean"); missing optional fields
/// are empty.
std::string report_to_csv(const EvalReport& report);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
/// Strategy x budget tables of seed means with an Average column.
std::string report_to_markdown(const EvalReport& report);

std::string render_report(const EvalReport& report, ReportFormat format);
/// Throws InvalidArgument for an empty report, IoFailure on write errors.
void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace medcal
