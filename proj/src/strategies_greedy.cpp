// Greedy covering strategies: fps, coreset, probcover, repdiv.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "medcal/rng.hpp"
#include "medcal/strategies.hpp"
#include "strategy_common.hpp"

namespace medcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRepdivTieTolerance = 1e-12;

// Argmax over unselected samples, lowest index on ties. Keys within
// `rel_tol` (relative) of the incumbent count as ties.
template <typename KeyFn>
std::size_t argmax_unselected(const std::vector<bool>& selected, KeyFn key,
                              double rel_tol = 0.0) {
  std::size_t best = selected.size();
  double best_key = -kInf;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i]) continue;
    const double k = key(i);
    if (best == selected.size() || k > best_key + rel_tol * std::max(1.0, std::abs(best_key))) {
      best = i;
      best_key = k;
    }
  }
  return best;
}

void update_min_distance(const FeatureBank& bank, Metric metric, std::size_t pick,
                         std::vector<double>& min_dist) {
  const auto x = bank.row(pick);
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    min_dist[i] = std::min(min_dist[i], distance(bank.row(i), x, metric));
  }
}

}  // namespace

std::vector<std::size_t> farthest_point_order(const FeatureBank& bank, Metric metric,
                                              std::size_t first, std::size_t m,
                                              std::vector<double>* pick_distances) {
  const std::size_t n = bank.n_samples();
  std::vector<std::size_t> order;
  std::vector<double> dists;
  if (m == 0) return order;
  std::vector<bool> selected(n, false);
  std::vector<double> min_dist(n, kInf);
  order.push_back(first);
  dists.push_back(kInf);
  selected[first] = true;
  update_min_distance(bank, metric, first, min_dist);
  while (order.size() < m) {
    const std::size_t pick = argmax_unselected(selected, [&](std::size_t i) { return min_dist[i]; });
    dists.push_back(min_dist[pick]);
    order.push_back(pick);
    selected[pick] = true;
    update_min_distance(bank, metric, pick, min_dist);
  }
  if (pick_distances) *pick_distances = std::move(dists);
  return order;
}

std::size_t closest_to_mean(const FeatureBank& bank, Metric metric) {
  const auto mean = column_means(bank);
  const std::span<const double> mean_view(mean);
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    const double d = distance(bank.row(i), mean_view, metric);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double pairwise_distance_quantile(const FeatureBank& bank, Metric metric, double q) {
  const std::size_t n = bank.n_samples();
  if (n > kDefaultPairwiseCap) {
    throw Error(ErrorCode::kCapacityExceeded,
                std::to_string(n) + " samples exceed the pairwise cap");
  }
  std::vector<double> values;
  values.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      values.push_back(distance(bank.row(i), bank.row(j), metric));
    }
  }
  if (values.empty()) return 0.0;
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double lo_value = values[lo];
  double hi_value = lo_value;
  if (hi != lo) {
    hi_value = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  }
  return lo_value + (pos - static_cast<double>(lo)) * (hi_value - lo_value);
}

QuerySet select_fps(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                    SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  const std::size_t n = bank.n_samples();
  Rng rng(cfg.seed);
  const auto first = static_cast<std::size_t>(rng.uniform_below(n));

  std::vector<std::size_t> picks;
  std::vector<double> scores;
  if (!cfg.fps_probabilistic_seeding) {
    picks = farthest_point_order(bank, cfg.metric, first, m, &scores);
  } else {
    // First ceil(M/2) picks are drawn with probability proportional to the
    // squared distance to the selected set; the rest are farthest-point.
    std::vector<bool> selected(n, false);
    std::vector<double> min_dist(n, kInf);
    const std::size_t seeded = (m + 1) / 2;
    auto take = [&](std::size_t pick, double score) {
      picks.push_back(pick);
      scores.push_back(score);
      selected[pick] = true;
      update_min_distance(bank, cfg.metric, pick, min_dist);
    };
    take(first, kInf);
    std::vector<double> weights(n);
    while (picks.size() < seeded) {
      for (std::size_t i = 0; i < n; ++i) weights[i] = selected[i] ? 0.0 : min_dist[i] * min_dist[i];
      std::size_t pick = rng.weighted_index(weights);
      if (pick == n) pick = argmax_unselected(selected, [](std::size_t) { return 0.0; });
      take(pick, min_dist[pick]);
    }
    while (picks.size() < m) {
      const std::size_t pick =
          argmax_unselected(selected, [&](std::size_t i) { return min_dist[i]; });
      take(pick, min_dist[pick]);
    }
  }

  QuerySet q;
  q.indices = std::move(picks);
  q.strategy = "fps";
  q.seed = cfg.seed;
  q.params = detail::base_params(m, cfg);
  q.params["first_index"] = std::to_string(first);
  q.params["probabilistic_seeding"] = cfg.fps_probabilistic_seeding ? "true" : "false";
  if (trace) trace->pick_scores = std::move(scores);
  return q;
}

QuerySet select_coreset(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                        SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  const std::size_t first = closest_to_mean(bank, cfg.metric);
  std::vector<double> scores;
  QuerySet q;
  q.indices = farthest_point_order(bank, cfg.metric, first, m, &scores);
  q.strategy = "coreset";
  q.seed = cfg.seed;
  q.params = detail::base_params(m, cfg);
  q.params["first_index"] = std::to_string(first);
  if (trace) trace->pick_scores = std::move(scores);
  return q;
}

QuerySet select_probcover(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                          SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  const std::size_t n = bank.n_samples();

  double delta = 0.0;
  std::string source;
  if (cfg.probcover_delta) {
    delta = *cfg.probcover_delta;
    source = "fixed";
  } else {
    delta = pairwise_distance_quantile(bank, cfg.metric, cfg.probcover_delta_quantile);
    source = "quantile";
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidDelta, "probcover radius must be positive, got " +
                                              format_double(delta) + " (" + source + ")");
  }

  // Edge x -> y iff d(x, y) < delta, y != x. Distances are symmetric, so the
  // lists double as in-neighbor lists.
  const DistanceMatrix dist = pairwise_distances(bank, cfg.metric);
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dist(i, j) < delta) adjacency[i].push_back(j);
    }
  }
  std::vector<double> uncovered_degree(n);
  for (std::size_t i = 0; i < n; ++i) uncovered_degree[i] = static_cast<double>(adjacency[i].size());

  std::vector<bool> selected(n, false);
  std::vector<bool> covered(n, false);
  std::size_t covered_count = 0;
  auto cover = [&](std::size_t y) {
    if (covered[y]) return;
    covered[y] = true;
    ++covered_count;
    for (std::size_t x : adjacency[y]) uncovered_degree[x] -= 1.0;
  };

  std::vector<std::size_t> picks;
  std::vector<double> scores;
  std::vector<std::size_t> covered_counts;
  std::vector<bool> after_full;
  while (picks.size() < m) {
    const bool full = covered_count == n;
    const std::size_t pick = full
        ? argmax_unselected(selected,
                            [&](std::size_t i) { return static_cast<double>(adjacency[i].size()); })
        : argmax_unselected(selected, [&](std::size_t i) { return uncovered_degree[i]; });
    scores.push_back(full ? static_cast<double>(adjacency[pick].size()) : uncovered_degree[pick]);
    after_full.push_back(full);
    picks.push_back(pick);
    selected[pick] = true;
    cover(pick);
    for (std::size_t y : adjacency[pick]) cover(y);
    covered_counts.push_back(covered_count);
  }

  QuerySet q;
  q.indices = std::move(picks);
  q.strategy = "probcover";
  q.seed = cfg.seed;
  q.params = detail::base_params(m, cfg);
  q.params["delta"] = format_double(delta);
  q.params["delta_source"] = source;
  if (!cfg.probcover_delta) q.params["delta_quantile"] = format_double(cfg.probcover_delta_quantile);
  if (trace) {
    trace->pick_scores = std::move(scores);
    trace->covered_counts = std::move(covered_counts);
    trace->after_full_coverage = std::move(after_full);
    trace->delta = delta;
  }
  return q;
}

QuerySet select_repdiv(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                       SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  if (!(cfg.repdiv_lambda >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "repdiv lambda must be nonnegative, got " + format_double(cfg.repdiv_lambda));
  }
  const std::size_t n = bank.n_samples();
  const DistanceMatrix dist = pairwise_distances(bank, cfg.metric);
  double d_max = 0.0;
  for (double d : dist.values()) d_max = std::max(d_max, d);
  auto similarity = [&](std::size_t a, std::size_t b) {
    return d_max > 0.0 ? 1.0 - dist(a, b) / d_max : 1.0;
  };

  // rep_sum[x]: sum of similarities to unselected y != x.
  std::vector<double> rep_sum(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (y != x) rep_sum[x] += similarity(x, y);
    }
  }
  std::vector<double> max_selected_sim(n, 0.0);
  std::vector<bool> selected(n, false);
  std::vector<std::size_t> picks;
  std::vector<double> scores;
  std::size_t unselected = n;
  const double lambda = cfg.repdiv_lambda;

  while (picks.size() < m) {
    const std::size_t others = unselected - 1;
    const bool any_selected = !picks.empty();
    auto score = [&](std::size_t x) {
      const double rep = others > 0 ? rep_sum[x] / static_cast<double>(others) : 0.0;
      return rep - (any_selected ? lambda * max_selected_sim[x] : 0.0);
    };
    // Scores are running sums, so mathematically equal scores can differ
    // in the last bits.
    const std::size_t pick = argmax_unselected(selected, score, kRepdivTieTolerance);
    scores.push_back(score(pick));
    picks.push_back(pick);
    selected[pick] = true;
    --unselected;
    for (std::size_t x = 0; x < n; ++x) {
      if (x == pick) continue;
      const double s = similarity(x, pick);
      rep_sum[x] -= s;
      max_selected_sim[x] = std::max(max_selected_sim[x], s);
    }
  }

  QuerySet q;
  q.indices = std::move(picks);
  q.strategy = "repdiv";
  q.seed = cfg.seed;
  q.params = detail::base_params(m, cfg);
  q.params["lambda"] = format_double(lambda);
  q.params["d_max"] = format_double(d_max);
  if (trace) trace->pick_scores = std::move(scores);
  return q;
}

}  // namespace medcal
