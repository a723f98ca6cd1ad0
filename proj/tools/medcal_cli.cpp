// medcal: select / bench / inspect / convert.
//
// Exit codes: 0 success, 2 input error (bad file, failed invariant, bad
// argument), 3 selection or processing error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "medcal/embedding_store.hpp"
#include "medcal/harness.hpp"
#include "medcal/strategies.hpp"

namespace {

using namespace medcal;

constexpr int kExitInput = 2;
constexpr int kExitStrategy = 3;

std::string env_name(const std::string& flag) {
  std::string out = "MEDCAL_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

template <typename T>
CLI::Option* add_opt(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
  return app->add_option("--" + flag, target, help)->envname(env_name(flag));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

FileFormat resolve_format(const std::string& name, const std::string& path) {
  return name == "auto" ? infer_file_format(path) : parse_file_format(name);
}

struct SelectArgs {
  std::string features;
  std::string format = "auto";
  std::string strategy;
  std::string budget;
  std::uint64_t seed = 0;
  std::string metric = "euclidean";
  std::string normalize = "auto";
  std::size_t typicality_knn = 20;
  std::optional<double> probcover_delta;
  double probcover_quantile = 0.02;
  double repdiv_lambda = 1.0;
  bool fps_probabilistic = false;
  std::size_t kmeans_max_iters = 300;
  std::size_t kmeans_restarts = 5;
  std::optional<double> kmeans_tol;
  std::string out;
};

int cmd_select(const SelectArgs& a) {
  FeatureBank bank = load_feature_bank(a.features, resolve_format(a.format, a.features));
  if (a.normalize == "auto") {
    if (bank.normalization() == Normalization::kRaw) bank = normalize(bank, Normalization::kL2);
  } else if (a.normalize != "raw") {
    bank = normalize(bank, parse_normalization(a.normalize));
  }

  StrategyConfig cfg;
  cfg.metric = parse_metric(a.metric);
  cfg.seed = a.seed;
  cfg.typicality_knn = a.typicality_knn;
  cfg.probcover_delta = a.probcover_delta;
  cfg.probcover_delta_quantile = a.probcover_quantile;
  cfg.repdiv_lambda = a.repdiv_lambda;
  cfg.fps_probabilistic_seeding = a.fps_probabilistic;
  cfg.kmeans.max_iters = a.kmeans_max_iters;
  cfg.kmeans.n_restarts = a.kmeans_restarts;
  cfg.kmeans.tol = a.kmeans_tol;

  const Budget budget = parse_budget(a.budget);
  const QuerySet q = run_strategy(a.strategy, bank, budget, cfg);

  std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open '" + a.out + "' for writing");
  out << query_set_to_json(q, bank);
  out.flush();
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for '" + a.out + "'");

  std::cout << "strategy: " << q.strategy << "\n"
            << "M: " << q.indices.size() << " of " << bank.n_samples() << "\n"
            << "normalization: " << to_string(bank.normalization()) << "\n"
            << "params:\n";
  for (const auto& [key, value] : q.params) std::cout << "  " << key << " = " << value << "\n";
  if (auto fg = bank.foreground()) {
    std::cout << "foreground_fraction: " << format_double(foreground_fraction(*fg, q)) << "\n";
  }
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

struct BenchArgs {
  SyntheticSpec spec;
  std::string strategies = "random,alps,typiclust,bal,fps,coreset,probcover,repdiv";
  std::string budgets = "0.01,0.02,0.03";
  std::string seeds = "0,1,2,3,4";
  std::string metric = "euclidean";
  std::size_t threads = 0;
  std::string out;
  std::string format = "markdown";
};

int cmd_bench(const BenchArgs& a) {
  std::vector<StrategyKind> kinds;
  for (const auto& s : split_list(a.strategies)) kinds.push_back(parse_strategy(s));
  std::vector<double> budgets;
  for (const auto& b : split_list(a.budgets)) {
    const Budget parsed = parse_budget(b);
    budgets.push_back(parsed.is_fraction() ? parsed.fraction_value()
                                           : static_cast<double>(parsed.count_value()));
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(a.seeds)) {
    try {
      seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad seed '" + s + "'");
    }
  }
  const ReportFormat format = parse_report_format(a.format);
  BenchmarkOptions options;
  options.strategy.metric = parse_metric(a.metric);
  options.threads = a.threads;
  const EvalReport report = benchmark_matrix(a.spec, kinds, budgets, seeds, options);
  if (a.out.empty()) {
    std::cout << render_report(report, format);
  } else {
    emit_report(report, format, a.out);
    std::cout << "wrote " << report.rows.size() << " rows and " << report.aggregates.size()
              << " aggregates to " << a.out << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& path, const std::string& format_name) {
  const FeatureBank bank = load_feature_bank(path, resolve_format(format_name, path), false);
  const Manifest& m = bank.manifest();
  std::cout << "file: " << path << "\n"
            << "N: " << bank.n_samples() << "\n"
            << "d: " << bank.dim() << "\n"
            << "normalization: " << to_string(bank.normalization()) << "\n"
            << "manifest:\n"
            << "  source_model: " << m.source_model << "\n"
            << "  created_at: " << m.created_at << "\n"
            << "  format_version: " << m.format_version << "\n";
  for (const auto& [key, value] : m.extra) std::cout << "  " << key << ": " << value << "\n";
  if (bank.group_ids()) {
    std::map<std::string, std::size_t> counts;
    for (const auto& g : *bank.group_ids()) ++counts[g];
    std::cout << "groups: " << counts.size() << "\n";
    for (const auto& [g, c] : counts) std::cout << "  " << g << ": " << c << "\n";
  }
  const ValidationReport report = validate(bank);
  for (const auto& w : report.warnings) {
    std::cout << "warning: " << to_string(w.code) << ": " << w.message << "\n";
  }
  if (report.clean()) {
    std::cout << "OK\n";
    return 0;
  }
  for (const auto& v : report.violations) {
    std::cout << "violation: " << to_string(v.code) << ": " << v.message << "\n";
  }
  std::cerr << "validation failed with " << report.violations.size() << " violation(s)\n";
  return kExitInput;
}

int cmd_convert(const std::string& in, const std::string& in_format, const std::string& out,
                const std::string& out_format, const std::string& mode) {
  FeatureBank bank = load_feature_bank(in, resolve_format(in_format, in));
  if (mode != "none") bank = normalize(bank, parse_normalization(mode));
  save_feature_bank(bank, out, resolve_format(out_format, out));
  std::cout << "converted " << bank.n_samples() << " x " << bank.dim() << " ("
            << to_string(bank.normalization()) << ") to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cold-start active learning sample selection"};
  app.require_subcommand(1);

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Select a query set from a feature bank");
  add_opt(select, "features", sel.features, "Feature bank file")->required();
  add_opt(select, "format", sel.format, "auto, binary or csv");
  add_opt(select, "strategy", sel.strategy,
          "random, alps, typiclust, bal, fps, coreset, probcover or repdiv")
      ->required();
  add_opt(select, "budget", sel.budget, "Fraction in (0, 1] or integer count")->required();
  add_opt(select, "seed", sel.seed, "Seed for random choices");
  add_opt(select, "metric", sel.metric, "euclidean or cosine");
  add_opt(select, "normalize", sel.normalize, "auto (l2 for raw banks), raw, l2 or zscore");
  add_opt(select, "typicality-knn", sel.typicality_knn, "Typiclust neighbor cap");
  add_opt(select, "probcover-delta", sel.probcover_delta, "Fixed probcover radius");
  add_opt(select, "probcover-quantile", sel.probcover_quantile,
          "Pairwise-distance quantile for the probcover radius");
  add_opt(select, "repdiv-lambda", sel.repdiv_lambda, "RepDiv diversity weight");
  select->add_flag("--fps-probabilistic", sel.fps_probabilistic,
                   "Distance-weighted seeding for the first half of FPS picks")
      ->envname("MEDCAL_FPS_PROBABILISTIC");
  add_opt(select, "kmeans-max-iters", sel.kmeans_max_iters, "Lloyd iteration cap");
  add_opt(select, "kmeans-restarts", sel.kmeans_restarts, "Seeded k-means++ restarts");
  add_opt(select, "kmeans-tol", sel.kmeans_tol, "Absolute centroid-shift tolerance");
  add_opt(select, "out", sel.out, "Query set JSON output")->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic strategy benchmark");
  add_opt(bench_cmd, "n-classes", bench.spec.n_classes, "Mixture classes");
  add_opt(bench_cmd, "samples-per-class", bench.spec.samples_per_class, "Samples per class");
  add_opt(bench_cmd, "dim", bench.spec.dim, "Feature dimension");
  add_opt(bench_cmd, "separation", bench.spec.class_separation,
          "Closest class-mean distance in within-class sd units");
  add_opt(bench_cmd, "sd", bench.spec.within_class_sd, "Within-class standard deviation");
  add_opt(bench_cmd, "data-seed", bench.spec.seed, "Mixture seed");
  add_opt(bench_cmd, "strategies", bench.strategies, "Comma-separated strategies");
  add_opt(bench_cmd, "budgets", bench.budgets, "Comma-separated budget fractions");
  add_opt(bench_cmd, "seeds", bench.seeds, "Comma-separated selection seeds");
  add_opt(bench_cmd, "metric", bench.metric, "euclidean or cosine");
  add_opt(bench_cmd, "threads", bench.threads, "Worker threads (0 = all cores)");
  add_opt(bench_cmd, "out", bench.out, "Report file (stdout when omitted)");
  add_opt(bench_cmd, "format", bench.format, "markdown, csv or json");

  std::string inspect_path, inspect_format = "auto";
  auto* inspect = app.add_subcommand("inspect", "Summarize and validate a feature bank");
  add_opt(inspect, "features", inspect_path, "Feature bank file")->required();
  add_opt(inspect, "format", inspect_format, "auto, binary or csv");

  std::string conv_in, conv_in_format = "auto", conv_out, conv_out_format = "auto",
                       conv_norm = "none";
  auto* convert = app.add_subcommand("convert", "Convert between bank formats");
  add_opt(convert, "in", conv_in, "Input bank")->required();
  add_opt(convert, "in-format", conv_in_format, "auto, binary or csv");
  add_opt(convert, "out", conv_out, "Output bank")->required();
  add_opt(convert, "out-format", conv_out_format, "auto, binary or csv");
  add_opt(convert, "normalize", conv_norm, "none, l2 or zscore");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*select) return cmd_select(sel);
    if (*bench_cmd) return cmd_bench(bench);
    if (*inspect) return cmd_inspect(inspect_path, inspect_format);
    if (*convert) return cmd_convert(conv_in, conv_in_format, conv_out, conv_out_format, conv_norm);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitInput : kExitStrategy;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStrategy;
  }
  return 0;
}
