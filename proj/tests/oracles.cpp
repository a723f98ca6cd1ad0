#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>

namespace medcal::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double naive_distance(const FeatureBank& bank, std::size_t a, std::size_t b, Metric metric) {
  const std::size_t d = bank.dim();
  const float* x = bank.features().data() + a * d;
  const float* y = bank.features().data() + b * d;
  if (metric == Metric::kEuclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double t = static_cast<double>(x[j]) - static_cast<double>(y[j]);
      s += t * t;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    dot += static_cast<double>(x[j]) * y[j];
    nx += static_cast<double>(x[j]) * x[j];
    ny += static_cast<double>(y[j]) * y[j];
  }
  if (nx == 0.0 && ny == 0.0) return 0.0;
  if (nx == 0.0 || ny == 0.0) return 1.0;
  return std::clamp(1.0 - dot / (std::sqrt(nx) * std::sqrt(ny)), 0.0, 2.0);
}

std::vector<std::vector<double>> naive_pairwise(const FeatureBank& bank, Metric metric) {
  const std::size_t n = bank.n_samples();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i][j] = i == j ? 0.0 : naive_distance(bank, i, j, metric);
  }
  return out;
}

std::vector<std::vector<std::size_t>> brute_knn_indices(const FeatureBank& bank, std::size_t k,
                                                        Metric metric) {
  const std::size_t n = bank.n_samples();
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.emplace_back(naive_distance(bank, i, j, metric), j);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t t = 0; t < k; ++t) out[i].push_back(all[t].second);
  }
  return out;
}

double exhaustive_kmeans_optimum(const FeatureBank& bank, std::size_t k) {
  const std::size_t n = bank.n_samples();
  const std::size_t d = bank.dim();
  std::vector<std::size_t> label(n, 0);
  double best = kInf;

  auto sse = [&]() {
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(d, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != c) continue;
        ++count;
        for (std::size_t j = 0; j < d; ++j) mean[j] += bank.features()[i * d + j];
      }
      for (auto& v : mean) v /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != c) continue;
        for (std::size_t j = 0; j < d; ++j) {
          const double t = bank.features()[i * d + j] - mean[j];
          total += t * t;
        }
      }
    }
    return total;
  };

  // Restricted growth strings: label[i] <= 1 + max(label[0..i-1]).
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (n - i < k - std::min(k, used)) return;
    if (i == n) {
      if (used == k) best = std::min(best, sse());
      return;
    }
    for (std::size_t c = 0; c <= used && c < k; ++c) {
      label[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

std::vector<std::size_t> brute_farthest_first(const FeatureBank& bank, Metric metric,
                                              std::size_t first, std::size_t m) {
  const std::size_t n = bank.n_samples();
  std::vector<std::size_t> chosen{first};
  while (chosen.size() < m) {
    std::size_t best = n;
    double best_value = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double nearest = kInf;
      for (std::size_t c : chosen) nearest = std::min(nearest, naive_distance(bank, i, c, metric));
      if (nearest > best_value) {
        best_value = nearest;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

std::size_t brute_closest_to_mean(const FeatureBank& bank, Metric metric) {
  const std::size_t n = bank.n_samples();
  const std::size_t d = bank.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += bank.features()[i * d + j];
  }
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double dist = 0.0;
    if (metric == Metric::kEuclidean) {
      for (std::size_t j = 0; j < d; ++j) {
        const double t = bank.features()[i * d + j] - mean[j] / static_cast<double>(n);
        dist += t * t;
      }
      dist = std::sqrt(dist);
    } else {
      double dot = 0.0, nx = 0.0, nm = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double mj = mean[j] / static_cast<double>(n);
        dot += bank.features()[i * d + j] * mj;
        nx += static_cast<double>(bank.features()[i * d + j]) * bank.features()[i * d + j];
        nm += mj * mj;
      }
      if (nx == 0.0 && nm == 0.0) dist = 0.0;
      else if (nx == 0.0 || nm == 0.0) dist = 1.0;
      else dist = std::clamp(1.0 - dot / (std::sqrt(nx) * std::sqrt(nm)), 0.0, 2.0);
    }
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

double covering_radius(const FeatureBank& bank, const std::vector<std::size_t>& centers,
                       Metric metric) {
  double radius = 0.0;
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    double nearest = kInf;
    for (std::size_t c : centers) nearest = std::min(nearest, naive_distance(bank, i, c, metric));
    radius = std::max(radius, nearest);
  }
  return radius;
}

double exhaustive_k_center(const FeatureBank& bank, std::size_t m, Metric metric) {
  const std::size_t n = bank.n_samples();
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(m), true);
  double best = kInf;
  do {
    std::vector<std::size_t> centers;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i]) centers.push_back(i);
    }
    best = std::min(best, covering_radius(bank, centers, metric));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

std::vector<std::size_t> brute_repdiv(const FeatureBank& bank, std::size_t m, double lambda,
                                      Metric metric) {
  const std::size_t n = bank.n_samples();
  const auto dist = naive_pairwise(bank, metric);
  double d_max = 0.0;
  for (const auto& row : dist) {
    for (double v : row) d_max = std::max(d_max, v);
  }
  auto sim = [&](std::size_t a, std::size_t b) {
    return d_max > 0.0 ? 1.0 - dist[a][b] / d_max : 1.0;
  };
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  while (chosen.size() < m) {
    std::size_t best = n;
    double best_score = -kInf;
    for (std::size_t x = 0; x < n; ++x) {
      if (taken[x]) continue;
      double rep = 0.0;
      std::size_t others = 0;
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x || taken[y]) continue;
        rep += sim(x, y);
        ++others;
      }
      if (others > 0) rep /= static_cast<double>(others);
      double penalty = 0.0;
      for (std::size_t s : chosen) penalty = std::max(penalty, sim(x, s));
      const double score = rep - (chosen.empty() ? 0.0 : lambda * penalty);
      if (best == n || score > best_score + 1e-12 * std::max(1.0, std::abs(best_score))) {
        best = x;
        best_score = score;
      }
    }
    chosen.push_back(best);
    taken[best] = true;
  }
  return chosen;
}

std::vector<double> brute_typicality(const FeatureBank& bank,
                                     const std::vector<std::size_t>& members, std::size_t cap,
                                     Metric metric) {
  std::vector<double> out;
  const std::size_t k = std::min(cap, members.size() - 1);
  for (std::size_t a : members) {
    if (k == 0) {
      out.push_back(kInf);
      continue;
    }
    std::vector<double> ds;
    for (std::size_t b : members) {
      if (b != a) ds.push_back(naive_distance(bank, a, b, metric));
    }
    std::sort(ds.begin(), ds.end());
    const double mean =
        std::accumulate(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
        static_cast<double>(k);
    out.push_back(mean > 0.0 ? 1.0 / mean : kInf);
  }
  return out;
}

double best_label_agreement(const std::vector<std::size_t>& labels,
                            const std::vector<std::size_t>& clusters, std::size_t n_labels) {
  std::size_t n_clusters = 0;
  for (std::size_t c : clusters) n_clusters = std::max(n_clusters, c + 1);
  std::vector<std::vector<std::size_t>> counts(n_clusters, std::vector<std::size_t>(n_labels, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[clusters[i]][labels[i]];
  // dp[mask]: best matched count using the first popcount(mask) clusters
  // mapped one-to-one onto the labels in mask.
  const std::size_t full = std::size_t{1} << n_labels;
  std::vector<long> dp(full, -1);
  dp[0] = 0;
  long best = 0;
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (dp[mask] < 0) continue;
    best = std::max(best, dp[mask]);
    const auto c = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (c >= n_clusters) continue;
    for (std::size_t l = 0; l < n_labels; ++l) {
      if (mask & (std::size_t{1} << l)) continue;
      const std::size_t next = mask | (std::size_t{1} << l);
      dp[next] = std::max(dp[next], dp[mask] + static_cast<long>(counts[c][l]));
    }
  }
  return static_cast<double>(best) / static_cast<double>(labels.size());
}

FeatureBank random_bank(std::mt19937_64& gen, std::size_t n, std::size_t dim, float lo, float hi) {
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> values(n * dim);
  for (auto& v : values) v = u(gen);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("r" + std::to_string(i));
  return FeatureBank(n, dim, std::move(values), std::move(ids), std::nullopt, Normalization::kRaw,
                     Manifest{});
}

}  // namespace medcal::oracle
