#include <algorithm>
#include <charconv>
#include <string>

#include "json.hpp"
#include "medcal/rng.hpp"
#include "medcal/strategies.hpp"
#include "strategy_common.hpp"

namespace medcal {

namespace detail {

void check_selection_size(const FeatureBank& bank, std::size_t m) {
  if (m < 1 || m > bank.n_samples()) {
    throw Error(ErrorCode::kBudgetOutOfRange, "M=" + std::to_string(m) + " outside [1, " +
                                                  std::to_string(bank.n_samples()) + "]");
  }
}

std::map<std::string, std::string> base_params(std::size_t m, const StrategyConfig& cfg) {
  return {{"M", std::to_string(m)},
          {"metric", std::string(to_string(cfg.metric))},
          {"seed", std::to_string(cfg.seed)}};
}

void fill_lowest_unselected(std::vector<std::size_t>& picks, std::size_t n, std::size_t m) {
  if (picks.size() >= m) return;
  std::vector<bool> taken(n, false);
  for (std::size_t i : picks) taken[i] = true;
  for (std::size_t i = 0; i < n && picks.size() < m; ++i) {
    if (!taken[i]) picks.push_back(i);
  }
}

}  // namespace detail

namespace {

constexpr std::pair<StrategyKind, std::string_view> kNames[] = {
    {StrategyKind::kRandom, "random"},       {StrategyKind::kAlps, "alps"},
    {StrategyKind::kTypiclust, "typiclust"}, {StrategyKind::kBal, "bal"},
    {StrategyKind::kFps, "fps"},             {StrategyKind::kCoreset, "coreset"},
    {StrategyKind::kProbcover, "probcover"}, {StrategyKind::kRepdiv, "repdiv"},
};

}  // namespace

std::string_view to_string(StrategyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (const auto& [k, known] : kNames) {
    if (known == name) return k;
  }
  throw Error(ErrorCode::kUnknownStrategy, "unknown strategy '" + std::string(name) + "'");
}

const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> kinds = [] {
    std::vector<StrategyKind> out;
    for (const auto& [k, name] : kNames) out.push_back(k);
    return out;
  }();
  return kinds;
}

bool is_seed_free(StrategyKind kind) {
  return kind == StrategyKind::kCoreset || kind == StrategyKind::kProbcover ||
         kind == StrategyKind::kRepdiv;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string query_set_to_json(const QuerySet& query, const FeatureBank& bank) {
  nlohmann::ordered_json j;
  j["strategy"] = query.strategy;
  j["seed"] = query.seed;
  j["params"] = query.params;
  j["indices"] = query.indices;
  std::vector<std::string> ids;
  ids.reserve(query.indices.size());
  for (std::size_t i : query.indices) ids.push_back(bank.sample_ids().at(i));
  j["sample_ids"] = ids;
  return j.dump(2) + "\n";
}

QuerySet query_set_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    QuerySet q;
    q.strategy = j.at("strategy").get<std::string>();
    q.seed = j.at("seed").get<std::uint64_t>();
    q.params = j.at("params").get<std::map<std::string, std::string>>();
    q.indices = j.at("indices").get<std::vector<std::size_t>>();
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedHeader, std::string("invalid query set JSON: ") + e.what());
  }
}

QuerySet select_random(const FeatureBank& bank, std::size_t m, std::uint64_t seed) {
  detail::check_selection_size(bank, m);
  Rng rng(seed);
  auto order = shuffled_indices(bank.n_samples(), rng);
  order.resize(m);
  QuerySet q;
  q.indices = std::move(order);
  q.strategy = "random";
  q.seed = seed;
  q.params = {{"M", std::to_string(m)},
              {"seed", std::to_string(seed)},
              {"generator", "xoshiro256**/splitmix64"},
              {"shuffle", "fisher-yates-descending"}};
  return q;
}

QuerySet run_strategy(StrategyKind kind, const FeatureBank& bank, const Budget& budget,
                      const StrategyConfig& cfg, SelectionTrace* trace) {
  const std::size_t m = resolve_budget(bank.n_samples(), budget);
  QuerySet q;
  switch (kind) {
    case StrategyKind::kRandom: q = select_random(bank, m, cfg.seed); break;
    case StrategyKind::kAlps: q = select_alps(bank, m, cfg, trace); break;
    case StrategyKind::kTypiclust: q = select_typiclust(bank, m, cfg, trace); break;
    case StrategyKind::kBal: q = select_bal(bank, m, cfg, trace); break;
    case StrategyKind::kFps: q = select_fps(bank, m, cfg, trace); break;
    case StrategyKind::kCoreset: q = select_coreset(bank, m, cfg, trace); break;
    case StrategyKind::kProbcover: q = select_probcover(bank, m, cfg, trace); break;
    case StrategyKind::kRepdiv: q = select_repdiv(bank, m, cfg, trace); break;
  }
  q.params["budget"] = budget.to_string();
  return q;
}

QuerySet run_strategy(std::string_view name, const FeatureBank& bank, const Budget& budget,
                      const StrategyConfig& cfg, SelectionTrace* trace) {
  return run_strategy(parse_strategy(name), bank, budget, cfg, trace);
}

}  // namespace medcal
