#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "medcal/harness.hpp"

namespace medcal {

namespace {

void require_query(const QuerySet& query, std::size_t n) {
  if (query.indices.empty()) throw Error(ErrorCode::kEmptyQuery, "query set is empty");
  for (std::size_t i : query.indices) {
    if (i >= n) {
      throw Error(ErrorCode::kInvalidArgument,
                  "query index " + std::to_string(i) + " out of range for " +
                      std::to_string(n) + " samples");
    }
  }
}

}  // namespace

double proxy_eval(const FeatureBank& train_bank, std::span<const std::size_t> train_labels,
                  const QuerySet& query, const FeatureBank& test_bank,
                  std::span<const std::size_t> test_labels, Metric metric) {
  require_query(query, train_bank.n_samples());
  if (test_bank.n_samples() == 0 || test_labels.size() != test_bank.n_samples() ||
      train_labels.size() != train_bank.n_samples()) {
    throw Error(ErrorCode::kInvalidArgument, "labels must align with nonempty banks");
  }
  if (test_bank.dim() != train_bank.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "train and test banks differ in dimension");
  }
  std::vector<std::size_t> labeled(query.indices.begin(), query.indices.end());
  std::sort(labeled.begin(), labeled.end());

  std::size_t correct = 0;
  for (std::size_t t = 0; t < test_bank.n_samples(); ++t) {
    std::size_t best = labeled.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : labeled) {
      const double d = distance(test_bank.row(t), train_bank.row(i), metric);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (train_labels[best] == test_labels[t]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_bank.n_samples());
}

CoverageMetrics coverage_metrics(const FeatureBank& bank, const QuerySet& query, Metric metric) {
  require_query(query, bank.n_samples());
  CoverageMetrics out;
  double total = 0.0;
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t q : query.indices) {
      nearest = std::min(nearest, distance(bank.row(i), bank.row(q), metric));
    }
    out.covering_radius = std::max(out.covering_radius, nearest);
    total += nearest;
  }
  out.mean_min_distance = total / static_cast<double>(bank.n_samples());
  return out;
}

ClassBalance class_balance(std::span<const std::size_t> labels, const QuerySet& query) {
  require_query(query, labels.size());
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t i : query.indices) ++histogram[labels[i]];
  ClassBalance out;
  out.class_coverage = histogram.size();
  const double m = static_cast<double>(query.indices.size());
  for (const auto& [label, count] : histogram) {
    const double p = static_cast<double>(count) / m;
    out.class_entropy -= p * std::log(p);
  }
  // -0.0 for a single class reads oddly in reports.
  if (out.class_entropy <= 0.0) out.class_entropy = 0.0;
  return out;
}

double foreground_fraction(const std::vector<bool>& foreground, const QuerySet& query) {
  require_query(query, foreground.size());
  std::size_t hits = 0;
  for (std::size_t i : query.indices) hits += foreground[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(query.indices.size());
}

}  // namespace medcal
