#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <string>
#include <thread>

#include "medcal/harness.hpp"

namespace medcal {

std::vector<AggregateRow> aggregate_rows(const std::vector<EvalRow>& rows) {
  std::vector<AggregateRow> out;
  std::map<std::pair<std::string, double>, std::size_t> slot;
  std::vector<std::size_t> fg_counts;
  for (const EvalRow& r : rows) {
    auto [it, inserted] = slot.try_emplace({r.strategy, r.budget_fraction}, out.size());
    if (inserted) {
      AggregateRow a;
      a.strategy = r.strategy;
      a.budget_fraction = r.budget_fraction;
      a.m = r.m;
      out.push_back(a);
      fg_counts.push_back(0);
    }
    AggregateRow& a = out[it->second];
    ++a.n_seeds;
    a.proxy_accuracy += r.proxy_accuracy;
    a.covering_radius += r.covering_radius;
    a.mean_min_distance += r.mean_min_distance;
    a.class_coverage += static_cast<double>(r.class_coverage);
    a.class_entropy += r.class_entropy;
    if (r.foreground_fraction) {
      a.foreground_fraction = a.foreground_fraction.value_or(0.0) + *r.foreground_fraction;
      ++fg_counts[it->second];
    }
  }
  for (std::size_t s = 0; s < out.size(); ++s) {
    AggregateRow& a = out[s];
    const double n = static_cast<double>(a.n_seeds);
    a.proxy_accuracy /= n;
    a.covering_radius /= n;
    a.mean_min_distance /= n;
    a.class_coverage /= n;
    a.class_entropy /= n;
    if (a.foreground_fraction) *a.foreground_fraction /= static_cast<double>(fg_counts[s]);
  }
  return out;
}

EvalReport benchmark_matrix(const SyntheticSpec& spec, const std::vector<StrategyKind>& strategies,
                            const std::vector<double>& budgets,
                            const std::vector<std::uint64_t>& seeds,
                            const BenchmarkOptions& options) {
  if (strategies.empty() || budgets.empty() || seeds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "benchmark grid needs nonempty strategy, budget "
                                             "and seed lists");
  }
  const LabeledBank train = generate_mixture(spec, 0);
  const LabeledBank test = generate_mixture(spec, 1);
  const std::size_t n = train.bank.n_samples();
  const auto foreground = train.bank.foreground();

  std::vector<std::size_t> resolved(budgets.size());
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    resolved[b] = resolve_budget(n, Budget::fraction(budgets[b]));
  }

  struct Cell {
    StrategyKind kind;
    std::size_t budget;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (StrategyKind kind : strategies) {
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      for (std::uint64_t seed : seeds) cells.push_back({kind, b, seed});
    }
  }

  std::vector<EvalRow> rows(cells.size());
  std::vector<std::exception_ptr> failures(cells.size());
  auto run_cell = [&](std::size_t c) {
    const Cell& cell = cells[c];
    try {
      StrategyConfig cfg = options.strategy;
      cfg.seed = cell.seed;
      const QuerySet q =
          run_strategy(cell.kind, train.bank, Budget::count(resolved[cell.budget]), cfg);
      EvalRow& row = rows[c];
      row.strategy = std::string(to_string(cell.kind));
      row.budget_fraction = budgets[cell.budget];
      row.m = q.indices.size();
      row.seed = cell.seed;
      row.proxy_accuracy =
          proxy_eval(train.bank, train.labels, q, test.bank, test.labels, cfg.metric);
      const auto cov = coverage_metrics(train.bank, q, cfg.metric);
      row.covering_radius = cov.covering_radius;
      row.mean_min_distance = cov.mean_min_distance;
      const auto balance = class_balance(train.labels, q);
      row.class_coverage = balance.class_coverage;
      row.class_entropy = balance.class_entropy;
      if (foreground) row.foreground_fraction = foreground_fraction(*foreground, q);
    } catch (const Error& e) {
      failures[c] = std::make_exception_ptr(
          Error(e.code(), "[strategy=" + std::string(to_string(cell.kind)) +
                              " budget=" + format_double(budgets[cell.budget]) +
                              " seed=" + std::to_string(cell.seed) + "] " + e.detail()));
    } catch (...) {
      failures[c] = std::current_exception();
    }
  };

  std::size_t threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cells.size());
  if (threads <= 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
      });
    }
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  EvalReport report;
  report.rows = std::move(rows);
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

}  // namespace medcal
