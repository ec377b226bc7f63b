#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "graphfilter/corpus.hpp"
#include "graphfilter/error.hpp"
#include "graphfilter/graph.hpp"
#include "graphfilter/selector.hpp"

namespace graphfilter {

/// Fraction of the graph's initial n-grams adjacent to at least one selected
/// sentence.
inline double coverage(std::span<const SentenceId> selected, const BipartiteGraph& graph) {
  if (graph.ngram_count() == 0) return 0.0;
  std::vector<char> seen(graph.ngram_count(), 0);
  std::size_t covered = 0;
  for (SentenceId u : selected) {
    for (NGramId v : graph.initial_neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++covered;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(graph.ngram_count());
}

inline constexpr double kMtldThreshold = 0.72;

struct MtldPass {
  std::size_t full_factors = 0;
  double partial = 0.0;
  double score = 0.0;
  bool degenerate = false;  // no factor at all; score falls back to the token count
};

struct Mtld {
  double value = 0.0;
  bool degenerate = false;
  MtldPass forward;
  MtldPass backward;
};

namespace detail {

template <typename It>
MtldPass mtld_pass(It first, It last, double threshold) {
  MtldPass pass;
  std::unordered_set<std::string_view> types;
  std::size_t count = 0;
  std::size_t total = 0;
  double ttr = 1.0;
  for (; first != last; ++first) {
    ++total;
    ++count;
    types.insert(*first);
    ttr = static_cast<double>(types.size()) / static_cast<double>(count);
    if (ttr < threshold) {
      ++pass.full_factors;
      types.clear();
      count = 0;
      ttr = 1.0;
    }
  }
  if (count > 0) pass.partial = (1.0 - ttr) / (1.0 - threshold);
  const double factors = static_cast<double>(pass.full_factors) + pass.partial;
  if (factors > 0.0) {
    pass.score = static_cast<double>(total) / factors;
  } else {
    pass.score = static_cast<double>(total);
    pass.degenerate = true;
  }
  return pass;
}

}  // namespace detail

/// Measure of textual lexical diversity: mean of a forward and a backward
/// type-token-ratio factor pass. A pass whose TTR never drops (zero factors)
/// reports the token count and sets `degenerate`.
inline Mtld mtld(std::span<const Token> tokens, double threshold = kMtldThreshold) {
  if (tokens.empty()) throw Error(ErrorKind::domain, "MTLD needs at least one token");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::domain, "MTLD threshold must lie in (0, 1)");
  }
  Mtld out;
  out.forward = detail::mtld_pass(tokens.begin(), tokens.end(), threshold);
  out.backward = detail::mtld_pass(tokens.rbegin(), tokens.rend(), threshold);
  out.value = 0.5 * (out.forward.score + out.backward.score);
  out.degenerate = out.forward.degenerate || out.backward.degenerate;
  return out;
}

struct SubsetReport {
  std::string strategy;
  std::size_t budget = 0;
  std::size_t selected = 0;
  double coverage = 0.0;
  double mean_quality = 0.0;
  double median_quality = 0.0;
  double mtld_instructions = 0.0;
  double mtld_responses = 0.0;
  bool mtld_degenerate = false;
  double seconds = 0.0;
};

struct StrategyRun {
  std::string name;
  SelectionResult result;
  double seconds = 0.0;
};

namespace detail {

inline double median_of(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

inline std::pair<double, bool> mtld_of_texts(std::span<const TrainingInstance> instances,
                                             std::span<const SentenceId> ids, bool responses,
                                             const TokenizerPolicy& policy) {
  std::vector<Token> tokens;
  for (SentenceId u : ids) {
    const auto& inst = instances[u];
    for (auto& t : tokenize(responses ? inst.response : inst.instruction, policy)) {
      if (!is_boundary(t)) tokens.push_back(std::move(t));
    }
  }
  if (tokens.empty()) return {0.0, true};
  const auto m = mtld(tokens);
  return {m.value, m.degenerate};
}

}  // namespace detail

/// One report per run, in input order. Quality statistics use `quality`
/// (the same scores the selection consumed); pass an empty span to report 0.
inline std::vector<SubsetReport> summarize(std::span<const StrategyRun> runs,
                                           std::span<const TrainingInstance> instances,
                                           const BipartiteGraph& graph, std::span<const double> quality,
                                           std::size_t budget, const TokenizerPolicy& policy = {}) {
  std::vector<SubsetReport> reports;
  for (const auto& run : runs) {
    const auto& ids = run.result.selected;
    for (SentenceId u : ids) {
      if (u >= instances.size()) throw Error(ErrorKind::domain, "unknown id " + std::to_string(u));
    }
    SubsetReport r;
    r.strategy = run.name;
    r.budget = budget;
    r.selected = ids.size();
    r.coverage = coverage(ids, graph);
    if (!quality.empty() && !ids.empty()) {
      std::vector<double> qs;
      for (SentenceId u : ids) qs.push_back(quality[u]);
      double sum = 0.0;
      for (double q : qs) sum += q;
      r.mean_quality = sum / static_cast<double>(qs.size());
      r.median_quality = detail::median_of(std::move(qs));
    }
    const auto [mi, di] = detail::mtld_of_texts(instances, ids, false, policy);
    const auto [mr, dr] = detail::mtld_of_texts(instances, ids, true, policy);
    r.mtld_instructions = mi;
    r.mtld_responses = mr;
    r.mtld_degenerate = di || dr;
    r.seconds = run.seconds;
    reports.push_back(std::move(r));
  }
  return reports;
}

inline nlohmann::ordered_json to_json(const SubsetReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["strategy"] = r.strategy;
  j["budget"] = r.budget;
  j["selected"] = r.selected;
  j["coverage"] = r.coverage;
  j["mean_quality"] = r.mean_quality;
  j["median_quality"] = r.median_quality;
  j["mtld_instructions"] = r.mtld_instructions;
  j["mtld_responses"] = r.mtld_responses;
  j["mtld_degenerate"] = r.mtld_degenerate;
  if (include_timing) j["seconds"] = r.seconds;
  return j;
}

inline std::string format_table(std::span<const SubsetReport> reports, bool include_timing) {
  std::vector<std::string> header = {"strategy", "budget", "selected", "coverage", "mean_q",
                                     "median_q", "mtld_instr", "mtld_resp"};
  if (include_timing) header.push_back("seconds");
  std::vector<std::vector<std::string>> rows;
  const auto num = [](double x, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << x;
    return s.str();
  };
  for (const auto& r : reports) {
    std::vector<std::string> row = {
        r.strategy, std::to_string(r.budget), std::to_string(r.selected), num(r.coverage, 4),
        num(r.mean_quality, 4), num(r.median_quality, 4),
        num(r.mtld_instructions, 2) + (r.mtld_degenerate ? "*" : ""), num(r.mtld_responses, 2)};
    if (include_timing) row.push_back(num(r.seconds, 3));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << "  ";
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << cells[c];
      }
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out.str();
}

/// Writes the reports as JSON lines to `path` and the aligned table to
/// `path + ".txt"`. Timing is opt-in so that repeated runs stay byte-identical.
inline void write_report(std::span<const SubsetReport> reports, const std::string& path,
                         bool include_timing = false) {
  const auto write = [](const std::string& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::write, "cannot open " + file + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::write, "failed writing " + file);
  };
  std::string lines;
  for (const auto& r : reports) lines += to_json(r, include_timing).dump() + '\n';
  write(path, lines);
  write(path + ".txt", format_table(reports, include_timing));
}

}  // namespace graphfilter
