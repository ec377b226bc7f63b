#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphfilter/corpus.hpp"
#include "graphfilter/error.hpp"
#include "graphfilter/graph.hpp"
#include "graphfilter/metrics.hpp"
#include "graphfilter/quality.hpp"
#include "graphfilter/selector.hpp"

namespace graphfilter {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitInput = 3,
  kExitMissingQuality = 4,
  kExitWrite = 5,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::input: return kExitInput;
    case ErrorKind::missing_quality: return kExitMissingQuality;
    case ErrorKind::write: return kExitWrite;
    case ErrorKind::domain: return kExitUnexpected;
  }
  return kExitUnexpected;
}

struct RunConfig {
  std::string input;
  std::string output;
  std::string report;
  std::string trace;
  long long budget = 0;
  std::vector<int> orders{1, 2, 3};
  std::string side = "instruction";
  std::string quality = "builtin";  // file | builtin | uniform
  std::string quality_file;
  std::string missing_quality = "fail";  // fail | median
  std::string priority = "combined";
  std::string tokenizer = "default";
  std::uint64_t seed = 0;
  std::vector<std::string> strategies;
  bool timing = false;
};

inline const std::vector<std::string>& known_strategies() {
  static const std::vector<std::string> names = {
      "graphfilter",         "graphfilter-combined", "graphfilter-quality",
      "graphfilter-diversity", "graphfilter-uniform", "random",
      "longest",             "quality-topk"};
  return names;
}

/// Resolved, validated form of RunConfig.
struct RunPlan {
  std::size_t budget = 0;
  BuildOptions build;
  PriorityMode mode = PriorityMode::combined;
  MissingQuality missing = MissingQuality::fail;
};

/// Checks every option and reports all problems in one config error.
inline RunPlan validate(const RunConfig& cfg, bool compare) {
  std::vector<std::string> problems;
  RunPlan plan;
  if (cfg.input.empty()) problems.push_back("--input is required");
  if (!compare && cfg.output.empty()) problems.push_back("--output is required");
  if (compare && !cfg.output.empty()) problems.push_back("--output is not used by compare");
  if (compare && !cfg.trace.empty()) problems.push_back("--trace is not used by compare");
  if (cfg.budget < 1) {
    problems.push_back("--budget must be a positive integer");
  } else {
    plan.budget = static_cast<std::size_t>(cfg.budget);
  }

  plan.build.orders.clear();
  for (int n : cfg.orders) {
    if (n < 1 || n > kMaxNGramOrder) {
      problems.push_back("--orders entries must be in {1,2,3}, got " + std::to_string(n));
    } else {
      plan.build.orders.insert(n);
    }
  }
  if (cfg.orders.empty()) problems.push_back("--orders must not be empty");

  if (auto side = content_side_from_name(cfg.side)) {
    plan.build.side = *side;
  } else {
    problems.push_back("--side must be instruction, response or both");
  }
  if (auto policy = TokenizerPolicy::from_name(cfg.tokenizer)) {
    plan.build.policy = *policy;
  } else {
    problems.push_back("--tokenizer must be default, whitespace or words");
  }
  if (auto mode = priority_mode_from_name(cfg.priority)) {
    plan.mode = *mode;
  } else {
    problems.push_back("--priority must be combined, quality, diversity or uniform");
  }

  if (cfg.quality == "file") {
    if (cfg.quality_file.empty()) problems.push_back("--quality file needs --quality-file");
  } else if (cfg.quality == "builtin" || cfg.quality == "uniform") {
    if (!cfg.quality_file.empty()) problems.push_back("--quality-file requires --quality file");
  } else {
    problems.push_back("--quality must be file, builtin or uniform");
  }
  if (cfg.missing_quality == "fail") {
    plan.missing = MissingQuality::fail;
  } else if (cfg.missing_quality == "median") {
    plan.missing = MissingQuality::median;
  } else {
    problems.push_back("--missing-quality must be fail or median");
  }

  if (compare) {
    if (cfg.strategies.empty()) problems.push_back("--strategies must name at least one strategy");
    for (const auto& s : cfg.strategies) {
      const auto& known = known_strategies();
      if (std::find(known.begin(), known.end(), s) == known.end()) {
        problems.push_back("unknown strategy \"" + s + "\"");
      }
    }
  }

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(ErrorKind::config, msg);
  }
  return plan;
}

struct ScoreSource {
  std::vector<double> scores;  // empty when unavailable
  std::string problem;         // why scores are unavailable
};

/// Scores for every instance from the configured source. Missing records are
/// reported through `problem` so callers that do not consume quality can
/// proceed.
inline ScoreSource load_scores(const RunConfig& cfg, const RunPlan& plan,
                               std::span<const TrainingInstance> instances) {
  ScoreSource out;
  if (cfg.quality == "uniform") {
    out.scores.assign(instances.size(), 1.0);
    return out;
  }
  QualityTable table;
  if (cfg.quality == "file") {
    table = load_quality_file(cfg.quality_file, instances.size());
  } else {
    table = builtin_quality(instances, plan.build.policy).records;
  }
  try {
    out.scores = resolve_scores(table, instances.size(), plan.missing);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::missing_quality) throw;
    out.problem = e.what();
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::write, "cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::write, "failed writing " + path);
}

inline std::string trace_lines(const SelectionResult& result) {
  std::string text;
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& s = result.steps[i];
    nlohmann::ordered_json j;
    j["step"] = i;
    j["id"] = s.id;
    j["priority"] = s.priority;
    j["newly_covered"] = s.newly_covered;
    text += j.dump() + '\n';
  }
  return text;
}

// Selected records in input order, byte-identical to the input lines.
inline std::string subset_lines(const SelectionResult& result,
                                std::span<const TrainingInstance> instances) {
  std::vector<SentenceId> ids = result.selected;
  std::sort(ids.begin(), ids.end());
  std::string text;
  for (SentenceId u : ids) text += instances[u].raw + '\n';
  return text;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::optional<PriorityMode> strategy_mode(const std::string& name, PriorityMode fallback) {
  if (name == "graphfilter") return fallback;
  if (name.rfind("graphfilter-", 0) == 0) return priority_mode_from_name(name.substr(12));
  return std::nullopt;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

inline std::span<const double> require_scores(const ScoreSource& source) {
  if (source.scores.empty()) throw Error(ErrorKind::missing_quality, source.problem);
  return source.scores;
}

}  // namespace detail

/// Runs one GraphFilter selection and writes the subset, plus optional trace
/// and report files. Returns a process exit code.
inline int run_select(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunPlan plan = validate(cfg, false);
    const auto instances = load_dataset(cfg.input);
    if (instances.empty()) throw Error(ErrorKind::input, cfg.input + ": dataset is empty");
    if (plan.budget > instances.size()) {
      err << "warning: budget " << plan.budget << " exceeds dataset size " << instances.size()
          << "; selecting all records\n";
    }
    const ScoreSource scores = load_scores(cfg, plan, instances);
    std::span<const double> quality;
    if (uses_quality(plan.mode)) {
      quality = detail::require_scores(scores);
    }

    auto built = build_graph(instances, plan.build);
    const auto start = std::chrono::steady_clock::now();
    const SelectionResult result =
        select(built.graph, built.stats, quality, {.budget = plan.budget, .mode = plan.mode});
    const double seconds = detail::seconds_since(start);

    write_text_file(cfg.output, subset_lines(result, instances));
    if (!cfg.trace.empty()) write_text_file(cfg.trace, trace_lines(result));
    if (!cfg.report.empty()) {
      const std::vector<StrategyRun> runs = {{"graphfilter-" + std::string(to_string(plan.mode)), result, seconds}};
      const auto reports = summarize(runs, instances, built.graph, scores.scores, plan.budget,
                                     plan.build.policy);
      write_report(reports, cfg.report, cfg.timing);
    }

    out << "selected " << result.selected.size() << " of " << instances.size()
        << " records (budget " << plan.budget << ")\n"
        << "coverage " << std::fixed << std::setprecision(4)
        << coverage(result.selected, built.graph) << " (" << result.covered_ngrams << " of "
        << result.initial_ngrams << " n-grams)\n"
        << "selection time " << std::setprecision(3) << seconds << " s\n";
    return static_cast<int>(kExitOk);
  });
}

/// Runs every requested strategy on the same corpus and emits one report row
/// per strategy, in the order given.
inline int run_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const RunPlan plan = validate(cfg, true);
    const auto instances = load_dataset(cfg.input);
    if (instances.empty()) throw Error(ErrorKind::input, cfg.input + ": dataset is empty");
    if (plan.budget > instances.size()) {
      err << "warning: budget " << plan.budget << " exceeds dataset size " << instances.size() << '\n';
    }
    const ScoreSource scores = load_scores(cfg, plan, instances);
    auto built = build_graph(instances, plan.build);

    std::vector<StrategyRun> runs;
    for (const auto& name : cfg.strategies) {
      const auto start = std::chrono::steady_clock::now();
      SelectionResult result;
      if (auto mode = detail::strategy_mode(name, plan.mode)) {
        std::span<const double> quality;
        if (uses_quality(*mode)) quality = detail::require_scores(scores);
        result = select(built.graph, built.stats, quality, {.budget = plan.budget, .mode = *mode});
      } else if (name == "random") {
        result = annotate_coverage(baseline_random(instances, plan.budget, cfg.seed), built.graph);
      } else if (name == "longest") {
        result = annotate_coverage(baseline_longest(instances, plan.budget, plan.build.policy), built.graph);
      } else {
        result = annotate_coverage(baseline_quality_topk(detail::require_scores(scores), plan.budget),
                                   built.graph);
      }
      runs.push_back({name, std::move(result), detail::seconds_since(start)});
    }

    const auto reports = summarize(runs, instances, built.graph, scores.scores, plan.budget,
                                   plan.build.policy);
    if (!cfg.report.empty()) write_report(reports, cfg.report, cfg.timing);
    out << format_table(reports, true);
    return static_cast<int>(kExitOk);
  });
}

}  // namespace graphfilter
