#include "medcal/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "medcal/geometry.hpp"
#include "medcal/rng.hpp"

namespace medcal {

namespace {

struct LloydState {
  const FeatureBank& bank;
  std::size_t k;
  std::vector<double> centroids;
  std::vector<std::size_t> assignments;
  std::vector<std::size_t> sizes;

  std::span<const double> centroid(std::size_t c) const {
    return {centroids.data() + c * bank.dim(), bank.dim()};
  }

  double sq_dist(std::size_t i, std::size_t c) const {
    return squared_euclidean(bank.row(i), centroid(c));
  }

  void set_centroid_to_point(std::size_t c, std::size_t i) {
    const auto x = bank.row(i);
    std::copy(x.begin(), x.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * bank.dim()));
  }

  // Nearest centroid for every sample, ties to the lowest cluster index.
  void assign() {
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < bank.n_samples(); ++i) {
      std::size_t best = 0;
      double best_d = sq_dist(i, 0);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(i, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignments[i] = best;
      ++sizes[best];
    }
  }

  // Reseed each empty cluster at the sample farthest from its assigned
  // centroid, drawn from clusters with more than one member. Returns false
  // if some cluster stays empty (every donor sits exactly on its centroid).
  bool repair_empty() {
    bool all_filled = true;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = bank.n_samples();
      double far_d = 0.0;
      for (std::size_t i = 0; i < bank.n_samples(); ++i) {
        if (sizes[assignments[i]] < 2) continue;
        const double d = sq_dist(i, assignments[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == bank.n_samples()) {
        all_filled = false;
        continue;
      }
      --sizes[assignments[far]];
      assignments[far] = c;
      sizes[c] = 1;
      set_centroid_to_point(c, far);
    }
    return all_filled;
  }

  // Means of the current assignment; empty clusters keep their centroid.
  // Returns the largest centroid displacement.
  double update_means() {
    const std::size_t d = bank.dim();
    std::vector<double> sums(k * d, 0.0);
    for (std::size_t i = 0; i < bank.n_samples(); ++i) {
      const auto x = bank.row(i);
      double* s = sums.data() + assignments[i] * d;
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      double shift = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double m = sums[c * d + j] / static_cast<double>(sizes[c]);
        const double diff = m - centroids[c * d + j];
        shift += diff * diff;
        centroids[c * d + j] = m;
      }
      max_shift = std::max(max_shift, std::sqrt(shift));
    }
    return max_shift;
  }

  // Hartigan single-sample moves: relocate a sample whenever that lowers
  // the inertia once both means are updated. Returns true if anything
  // moved. Requires centroids to be the means of a full assignment.
  bool hartigan_sweep() {
    const std::size_t d = bank.dim();
    bool moved = false;
    for (std::size_t i = 0; i < bank.n_samples(); ++i) {
      const std::size_t from = assignments[i];
      if (sizes[from] < 2) continue;
      const double na = static_cast<double>(sizes[from]);
      const double cost_out = sq_dist(i, from) * na / (na - 1.0);
      std::size_t to = from;
      double best_gain = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (c == from) continue;
        const double nb = static_cast<double>(sizes[c]);
        const double gain = cost_out - sq_dist(i, c) * nb / (nb + 1.0);
        // Relative slack keeps rounding noise from cycling moves.
        if (gain > best_gain && gain > 1e-12 * cost_out) {
          best_gain = gain;
          to = c;
        }
      }
      if (to == from) continue;
      const auto x = bank.row(i);
      const double nb = static_cast<double>(sizes[to]);
      for (std::size_t j = 0; j < d; ++j) {
        double& ma = centroids[from * d + j];
        double& mb = centroids[to * d + j];
        ma = (ma * na - x[j]) / (na - 1.0);
        mb = (mb * nb + x[j]) / (nb + 1.0);
      }
      --sizes[from];
      ++sizes[to];
      assignments[i] = to;
      moved = true;
    }
    return moved;
  }

  double inertia() const {
    double total = 0.0;
    for (std::size_t i = 0; i < bank.n_samples(); ++i) total += sq_dist(i, assignments[i]);
    return total;
  }
};

// Greedy k-means++: each new center is the best of 2 + floor(ln k)
// D^2-weighted candidates, judged by the potential it leaves behind.
void kmeanspp_init(LloydState& state, Rng& rng) {
  const FeatureBank& bank = state.bank;
  const std::size_t n = bank.n_samples();
  const std::size_t trials =
      2 + static_cast<std::size_t>(std::log(static_cast<double>(state.k)));
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.uniform_below(n));
  state.set_centroid_to_point(0, first);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = state.sq_dist(i, 0);
  for (std::size_t c = 1; c < state.k; ++c) {
    std::size_t pick = n;
    double pick_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t candidate = rng.weighted_index(d2);
      if (candidate == n) break;
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        potential += std::min(d2[i], squared_euclidean(bank.row(i), bank.row(candidate)));
      }
      if (potential < pick_potential) {
        pick_potential = potential;
        pick = candidate;
      }
    }
    if (pick == n) {
      // Every sample coincides with a chosen centroid.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) -
                                      chosen.begin());
    }
    chosen[pick] = true;
    state.set_centroid_to_point(c, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], state.sq_dist(i, c));
    d2[pick] = 0.0;
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> ClusterModel::members() const {
  std::vector<std::vector<std::size_t>> out(k);
  for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
  return out;
}

double compute_inertia(const FeatureBank& bank, const ClusterModel& model) {
  double total = 0.0;
  for (std::size_t i = 0; i < bank.n_samples(); ++i) {
    total += squared_euclidean(bank.row(i), model.centroid(model.assignments[i]));
  }
  return total;
}

ClusterModel kmeans_run(const FeatureBank& bank, std::size_t k, const KMeansConfig& cfg,
                        std::size_t restart) {
  const std::size_t n = bank.n_samples();
  if (k < 1 || k > n) {
    throw Error(ErrorCode::kInvalidK,
                "k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const double tol = cfg.tol ? *cfg.tol : cfg.tol_fraction * data_diameter(bank);

  LloydState state{bank, k, std::vector<double>(k * bank.dim(), 0.0),
                   std::vector<std::size_t>(n, 0), std::vector<std::size_t>(k, 0)};
  Rng rng(cfg.seed, kRestartStreamBase + restart);
  kmeanspp_init(state, rng);

  ClusterModel model;
  model.k = k;
  model.dim = bank.dim();
  model.tol_used = tol;
  model.restart = restart;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    state.assign();
    state.repair_empty();
    const double shift = state.update_means();
    model.inertia_history.push_back(state.inertia());
    model.iterations_run = it;
    if (shift <= tol) {
      model.converged = true;
      break;
    }
  }

  // Hartigan refinement escapes Lloyd fixed points that a single sample
  // move can still improve; its fixed points are also Lloyd fixed points.
  if (std::find(state.sizes.begin(), state.sizes.end(), 0) == state.sizes.end()) {
    for (std::size_t sweep = 0; sweep < cfg.max_iters; ++sweep) {
      if (!state.hartigan_sweep()) break;
      state.update_means();
      model.inertia_history.push_back(state.inertia());
    }
  }

  // Final assignment against the last centroids. Each repair strictly lowers
  // the inertia, so this terminates.
  bool filled = true;
  for (std::size_t pass = 0; pass <= n + k; ++pass) {
    state.assign();
    if (std::find(state.sizes.begin(), state.sizes.end(), 0) == state.sizes.end()) break;
    filled = state.repair_empty();
    if (!filled) {
      state.assign();
      break;
    }
  }

  model.centroids = std::move(state.centroids);
  model.assignments = std::move(state.assignments);
  model.collapsed.assign(k, false);
  for (std::size_t c = 0; c < k; ++c) model.collapsed[c] = state.sizes[c] == 0;
  model.degenerate = !filled ||
                     std::find(model.collapsed.begin(), model.collapsed.end(), true) !=
                         model.collapsed.end();
  model.inertia = compute_inertia(bank, model);
  return model;
}

ClusterModel kmeans(const FeatureBank& bank, std::size_t k, const KMeansConfig& cfg) {
  if (k < 1 || k > bank.n_samples()) {
    throw Error(ErrorCode::kInvalidK, "k=" + std::to_string(k) + " outside [1, " +
                                          std::to_string(bank.n_samples()) + "]");
  }
  KMeansConfig resolved = cfg;
  if (!resolved.tol) resolved.tol = cfg.tol_fraction * data_diameter(bank);
  const std::size_t restarts = std::max<std::size_t>(1, cfg.n_restarts);
  ClusterModel best = kmeans_run(bank, k, resolved, 0);
  for (std::size_t r = 1; r < restarts; ++r) {
    ClusterModel candidate = kmeans_run(bank, k, resolved, r);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

}  // namespace medcal
