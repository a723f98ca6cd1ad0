// K-means based strategies: one pick per cluster.

#include <algorithm>
#include <limits>
#include <string>

#include "medcal/strategies.hpp"
#include "strategy_common.hpp"

namespace medcal {

namespace {

ClusterModel cluster_bank(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg) {
  KMeansConfig kcfg = cfg.kmeans;
  kcfg.seed = cfg.seed;
  return kmeans(bank, m, kcfg);
}

void add_kmeans_params(std::map<std::string, std::string>& params, const StrategyConfig& cfg,
                       const ClusterModel& model) {
  params["kmeans_seed"] = std::to_string(cfg.seed);
  params["kmeans_max_iters"] = std::to_string(cfg.kmeans.max_iters);
  params["kmeans_n_restarts"] = std::to_string(std::max<std::size_t>(1, cfg.kmeans.n_restarts));
  params["kmeans_tol"] = format_double(model.tol_used);
  params["kmeans_inertia"] = format_double(model.inertia);
  params["kmeans_iterations"] = std::to_string(model.iterations_run);
  params["kmeans_converged"] = model.converged ? "true" : "false";
  const auto collapsed = std::count(model.collapsed.begin(), model.collapsed.end(), true);
  params["collapsed_clusters"] = std::to_string(collapsed);
}

// Scores each member of every non-collapsed cluster and keeps the best one
// per cluster; `better(a, b)` says score a beats score b. Members are
// visited in ascending index order so strict comparison keeps the lowest
// index on ties.
template <typename ScoreFn, typename BetterFn>
QuerySet pick_per_cluster(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                          std::string_view name, const ClusterModel& model, ScoreFn score,
                          BetterFn better, SelectionTrace* trace) {
  std::vector<std::size_t> picks;
  std::vector<std::size_t> pick_clusters;
  std::vector<double> pick_scores;
  const auto members = model.members();
  for (std::size_t c = 0; c < model.k; ++c) {
    if (model.collapsed[c] || members[c].empty()) continue;
    const std::vector<double> scores = score(c, members[c]);
    std::size_t best = 0;
    for (std::size_t t = 1; t < members[c].size(); ++t) {
      if (better(scores[t], scores[best])) best = t;
    }
    picks.push_back(members[c][best]);
    pick_clusters.push_back(c);
    pick_scores.push_back(scores[best]);
  }
  detail::fill_lowest_unselected(picks, bank.n_samples(), m);
  pick_clusters.resize(picks.size(), kNoCluster);
  pick_scores.resize(picks.size(), std::numeric_limits<double>::quiet_NaN());

  QuerySet q;
  q.indices = std::move(picks);
  q.strategy = std::string(name);
  q.seed = cfg.seed;
  q.params = detail::base_params(m, cfg);
  add_kmeans_params(q.params, cfg, model);
  if (trace) {
    trace->clusters = model;
    trace->pick_clusters = std::move(pick_clusters);
    trace->pick_scores = std::move(pick_scores);
  }
  return q;
}

}  // namespace

std::vector<double> cluster_typicality(const FeatureBank& bank,
                                       std::span<const std::size_t> members,
                                       std::size_t knn_cap, Metric metric) {
  const std::size_t size = members.size();
  std::vector<double> out(size, std::numeric_limits<double>::infinity());
  if (size < 2) return out;
  const std::size_t k = std::min(knn_cap, size - 1);
  if (k == 0) return out;
  std::vector<double> row;
  row.reserve(size - 1);
  for (std::size_t a = 0; a < size; ++a) {
    row.clear();
    for (std::size_t b = 0; b < size; ++b) {
      if (a != b) row.push_back(distance(bank.row(members[a]), bank.row(members[b]), metric));
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    std::sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k));
    double sum = 0.0;
    for (std::size_t t = 0; t < k; ++t) sum += row[t];
    const double mean = sum / static_cast<double>(k);
    if (mean > 0.0) out[a] = 1.0 / mean;
  }
  return out;
}

double cluster_distance_difference(const FeatureBank& bank, const ClusterModel& model,
                                   std::size_t sample, Metric metric) {
  double first = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.k; ++c) {
    const double d = distance(bank.row(sample), model.centroid(c), metric);
    if (d < first) {
      second = first;
      first = d;
    } else if (d < second) {
      second = d;
    }
  }
  if (model.k < 2) return 0.0;
  return second - first;
}

QuerySet select_alps(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                     SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  const ClusterModel model = cluster_bank(bank, m, cfg);
  auto score = [&](std::size_t c, const std::vector<std::size_t>& members) {
    std::vector<double> d(members.size());
    for (std::size_t t = 0; t < members.size(); ++t) {
      d[t] = distance(bank.row(members[t]), model.centroid(c), cfg.metric);
    }
    return d;
  };
  return pick_per_cluster(bank, m, cfg, "alps", model, score, std::less<double>{}, trace);
}

QuerySet select_typiclust(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                          SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  const ClusterModel model = cluster_bank(bank, m, cfg);
  auto score = [&](std::size_t, const std::vector<std::size_t>& members) {
    return cluster_typicality(bank, members, cfg.typicality_knn, cfg.metric);
  };
  QuerySet q =
      pick_per_cluster(bank, m, cfg, "typiclust", model, score, std::greater<double>{}, trace);
  q.params["typicality_knn"] = std::to_string(cfg.typicality_knn);
  return q;
}

QuerySet select_bal(const FeatureBank& bank, std::size_t m, const StrategyConfig& cfg,
                    SelectionTrace* trace) {
  detail::check_selection_size(bank, m);
  if (m < 2) {
    throw Error(ErrorCode::kBudgetTooSmall, "bal needs at least 2 clusters, got M=" +
                                                std::to_string(m));
  }
  const ClusterModel model = cluster_bank(bank, m, cfg);
  auto score = [&](std::size_t, const std::vector<std::size_t>& members) {
    std::vector<double> ccd(members.size());
    for (std::size_t t = 0; t < members.size(); ++t) {
      ccd[t] = cluster_distance_difference(bank, model, members[t], cfg.metric);
    }
    return ccd;
  };
  return pick_per_cluster(bank, m, cfg, "bal", model, score, std::less<double>{}, trace);
}

}  // namespace medcal
