#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "graphfilter/corpus.hpp"
#include "graphfilter/error.hpp"
#include "graphfilter/graph.hpp"
#include "graphfilter/lazy_heap.hpp"

namespace graphfilter {

enum class PriorityMode {
  combined,        // quality(u) * diversity(u)
  quality_only,    // quality(u)
  diversity_only,  // diversity(u)
  uniform,         // current degree of u
};

inline const char* to_string(PriorityMode mode) {
  switch (mode) {
    case PriorityMode::combined: return "combined";
    case PriorityMode::quality_only: return "quality";
    case PriorityMode::diversity_only: return "diversity";
    case PriorityMode::uniform: return "uniform";
  }
  return "?";
}

inline std::optional<PriorityMode> priority_mode_from_name(std::string_view name) {
  if (name == "combined") return PriorityMode::combined;
  if (name == "quality") return PriorityMode::quality_only;
  if (name == "diversity") return PriorityMode::diversity_only;
  if (name == "uniform") return PriorityMode::uniform;
  return std::nullopt;
}

inline bool uses_quality(PriorityMode mode) {
  return mode == PriorityMode::combined || mode == PriorityMode::quality_only;
}

inline bool uses_diversity(PriorityMode mode) {
  return mode == PriorityMode::combined || mode == PriorityMode::diversity_only;
}

struct SelectionConfig {
  std::size_t budget = 1;
  PriorityMode mode = PriorityMode::combined;
  std::uint64_t seed = 0;  // baselines only
  // Audit every step: greedy dominance under full recomputation plus a graph
  // consistency walk. Quadratic; meant for tests.
  bool audit = false;
};

struct SelectionStep {
  SentenceId id = 0;
  double priority = 0.0;
  std::size_t newly_covered = 0;

  bool operator==(const SelectionStep&) const = default;
};

struct SelectionResult {
  std::vector<SentenceId> selected;
  std::vector<SelectionStep> steps;
  std::size_t covered_ngrams = 0;
  std::size_t initial_ngrams = 0;

  bool operator==(const SelectionResult&) const = default;
};

/// Sum of the frozen TF-IDF weights of u's live neighbors, ascending by id.
inline double diversity(SentenceId u, const BipartiteGraph& graph, const CorpusStats& stats) {
  double sum = 0.0;
  graph.for_each_neighbor(u, [&](NGramId v) { sum += stats.tfidf[v]; });
  return sum;
}

inline double priority(SentenceId u, const BipartiteGraph& graph, const CorpusStats& stats,
                       std::span<const double> quality, PriorityMode mode) {
  if (uses_quality(mode) && u >= quality.size()) {
    throw Error(ErrorKind::missing_quality, "no quality score for sentence " + std::to_string(u));
  }
  if (!graph.sentence_live(u)) {
    throw Error(ErrorKind::domain, "sentence " + std::to_string(u) + " is not live");
  }
  switch (mode) {
    case PriorityMode::combined: return quality[u] * diversity(u, graph, stats);
    case PriorityMode::quality_only: return quality[u];
    case PriorityMode::diversity_only: return diversity(u, graph, stats);
    case PriorityMode::uniform: return static_cast<double>(graph.degree(u));
  }
  return 0.0;
}

namespace detail {

// Ordering used to pick the next sentence: priority, then quality (0 for
// modes that ignore it), then the lower id.
struct Rank {
  double priority = 0.0;
  double quality = 0.0;
  SentenceId id = 0;

  bool operator<(const Rank& o) const {
    if (priority != o.priority) return priority < o.priority;
    if (quality != o.quality) return quality < o.quality;
    return id > o.id;
  }
};

inline Rank rank_of(SentenceId u, const BipartiteGraph& graph, const CorpusStats& stats,
                    std::span<const double> quality, PriorityMode mode) {
  return {priority(u, graph, stats, quality, mode), uses_quality(mode) ? quality[u] : 0.0, u};
}

inline void check_inputs(const BipartiteGraph& graph, const CorpusStats& stats,
                         std::span<const double> quality, const SelectionConfig& config) {
  if (config.budget < 1) throw Error(ErrorKind::config, "budget must be at least 1");
  if (uses_diversity(config.mode) && stats.ngram_count() != graph.ngram_count()) {
    throw Error(ErrorKind::domain, "corpus statistics do not match the graph");
  }
  if (uses_quality(config.mode) || !quality.empty()) {
    if (quality.size() != graph.sentence_count()) {
      throw Error(ErrorKind::missing_quality,
                  "quality scores cover " + std::to_string(quality.size()) + " ids, graph has " +
                      std::to_string(graph.sentence_count()));
    }
    for (double q : quality) {
      if (!std::isfinite(q)) throw Error(ErrorKind::domain, "quality scores must be finite");
    }
  }
}

inline std::optional<Rank> best_live(const BipartiteGraph& graph, const CorpusStats& stats,
                                     std::span<const double> quality, PriorityMode mode) {
  std::optional<Rank> best;
  for (SentenceId u = 0; u < graph.sentence_count(); ++u) {
    if (!graph.sentence_live(u)) continue;
    const Rank r = rank_of(u, graph, stats, quality, mode);
    if (!best || *best < r) best = r;
  }
  return best;
}

inline void audit_step(const BipartiteGraph& graph, const CorpusStats& stats,
                       std::span<const double> quality, PriorityMode mode, const Rank& chosen) {
  const auto best = best_live(graph, stats, quality, mode);
  if (!best || best->id != chosen.id || best->priority != chosen.priority) {
    throw std::logic_error("greedy dominance violated at sentence " + std::to_string(chosen.id));
  }
}

inline void record_step(SelectionResult& result, const Rank& rank, const RemovalRecord& removal) {
  result.selected.push_back(rank.id);
  result.steps.push_back({rank.id, rank.priority, removal.covered.size()});
  result.covered_ngrams += removal.covered.size();
}

}  // namespace detail

/// Greedy selection with a lazily invalidated max-heap.
///
/// Each round pops the best valid entry, removes the sentence and its n-grams
/// from the graph, and re-pushes fresh entries only for the sentences that
/// lost an edge; every other priority is unchanged by construction. Ties are
/// broken by quality and then by the lower id, so the sequence equals the one
/// produced by rescanning every live sentence each round (select_reference).
/// Once every n-gram is covered all diversity-based priorities are 0 and the
/// tie chain decides the remaining picks.
inline SelectionResult select(BipartiteGraph graph, const CorpusStats& stats,
                              std::span<const double> quality, const SelectionConfig& config) {
  detail::check_inputs(graph, stats, quality, config);
  SelectionResult result;
  result.initial_ngrams = graph.ngram_count();

  LazyMaxHeap<detail::Rank> heap(graph.sentence_count());
  for (SentenceId u = 0; u < graph.sentence_count(); ++u) {
    if (graph.sentence_live(u)) heap.push(u, detail::rank_of(u, graph, stats, quality, config.mode));
  }

  while (result.selected.size() < config.budget && graph.live_sentence_count() > 0) {
    const auto top = heap.pop();
    if (!top) throw std::logic_error("heap exhausted while live sentences remain");
    const detail::Rank& rank = top->second;
    if (config.audit) detail::audit_step(graph, stats, quality, config.mode, rank);

    const RemovalRecord removal = graph.remove_selected(rank.id);
    detail::record_step(result, rank, removal);
    for (SentenceId w : removal.affected) {
      heap.push(w, detail::rank_of(w, graph, stats, quality, config.mode));
    }
    if (config.audit) {
      if (auto problem = graph.audit(); !problem.empty()) throw std::logic_error(problem);
    }
  }
  return result;
}

/// Naive oracle for select: recomputes every live priority each round.
inline SelectionResult select_reference(BipartiteGraph graph, const CorpusStats& stats,
                                        std::span<const double> quality,
                                        const SelectionConfig& config) {
  detail::check_inputs(graph, stats, quality, config);
  SelectionResult result;
  result.initial_ngrams = graph.ngram_count();
  while (result.selected.size() < config.budget && graph.live_sentence_count() > 0) {
    const auto best = detail::best_live(graph, stats, quality, config.mode);
    const RemovalRecord removal = graph.remove_selected(best->id);
    detail::record_step(result, *best, removal);
  }
  return result;
}

/// Exact minimum number of live sentences whose neighbors cover every live
/// n-gram, by exhaustive search over subsets.
inline std::size_t oracle_min_cover(const BipartiteGraph& graph, std::size_t cap = 20) {
  std::vector<SentenceId> sentences;
  for (SentenceId u = 0; u < graph.sentence_count(); ++u) {
    if (graph.sentence_live(u)) sentences.push_back(u);
  }
  if (sentences.size() > cap) {
    throw Error(ErrorKind::domain, "oracle limited to " + std::to_string(cap) + " sentences, got " +
                                       std::to_string(sentences.size()));
  }

  std::vector<std::size_t> bit(graph.ngram_count(), 0);
  std::size_t universe = 0;
  for (NGramId v = 0; v < graph.ngram_count(); ++v) {
    if (graph.ngram_live(v)) bit[v] = universe++;
  }
  if (universe == 0) return 0;
  const std::size_t words = (universe + 63) / 64;
  std::vector<std::vector<std::uint64_t>> sets(sentences.size(), std::vector<std::uint64_t>(words, 0));
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    graph.for_each_neighbor(sentences[i], [&](NGramId v) {
      sets[i][bit[v] / 64] |= std::uint64_t{1} << (bit[v] % 64);
    });
  }

  const std::uint64_t subsets = std::uint64_t{1} << sentences.size();
  std::size_t best = sentences.size();
  std::vector<std::uint64_t> acc(words);
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size >= best) continue;
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (mask >> i & 1) {
        for (std::size_t w = 0; w < words; ++w) acc[w] |= sets[i][w];
      }
    }
    std::size_t count = 0;
    for (std::uint64_t w : acc) count += static_cast<std::size_t>(std::popcount(w));
    if (count == universe) best = size;
  }
  return best;
}

inline double harmonic_number(std::size_t r) {
  double h = 0.0;
  for (std::size_t k = r; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return h;
}

struct HarmonicBound {
  std::size_t greedy_size = 0;
  std::size_t optimum = 0;
  std::size_t max_degree = 0;
  double harmonic = 0.0;
  bool holds = false;
};

/// Runs degree-priority greedy to full coverage and compares its cover size
/// against the exact optimum and the H(r) approximation factor.
inline HarmonicBound harmonic_bound_check(const BipartiteGraph& graph, std::size_t cap = 20) {
  HarmonicBound out;
  out.optimum = oracle_min_cover(graph, cap);
  for (SentenceId u = 0; u < graph.sentence_count(); ++u) {
    if (graph.sentence_live(u)) out.max_degree = std::max(out.max_degree, graph.degree(u));
  }
  out.harmonic = harmonic_number(out.max_degree);

  const std::size_t target = graph.live_ngram_count();
  std::size_t covered = 0;
  if (target > 0) {
    const auto result = select(graph, CorpusStats{}, {},
                               {.budget = graph.live_sentence_count(), .mode = PriorityMode::uniform});
    for (const auto& step : result.steps) {
      covered += step.newly_covered;
      ++out.greedy_size;
      if (covered == target) break;
    }
  }
  // Relative slack only absorbs rounding in H(r).
  out.holds = static_cast<double>(out.greedy_size) <=
              out.harmonic * static_cast<double>(out.optimum) * (1.0 + 1e-12);
  return out;
}

namespace detail {

// Unbiased draw in [0, n) from a 64-bit engine; avoids the
// implementation-defined std::uniform_int_distribution.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Ids ordered by descending key, ties by ascending id; first k kept.
inline SelectionResult top_k(std::span<const double> keys, std::size_t k) {
  std::vector<SentenceId> ids(keys.size());
  std::iota(ids.begin(), ids.end(), SentenceId{0});
  std::stable_sort(ids.begin(), ids.end(),
                   [&](SentenceId a, SentenceId b) { return keys[a] > keys[b]; });
  ids.resize(std::min(k, ids.size()));
  SelectionResult result;
  for (SentenceId u : ids) {
    result.selected.push_back(u);
    result.steps.push_back({u, keys[u], 0});
  }
  return result;
}

}  // namespace detail

/// Uniform sample without replacement (partial Fisher-Yates on mt19937_64).
inline SelectionResult baseline_random(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<SentenceId> ids(n);
  std::iota(ids.begin(), ids.end(), SentenceId{0});
  std::mt19937_64 rng(seed);
  const std::size_t take = std::min(k, n);
  SelectionResult result;
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(detail::bounded(rng, n - i));
    std::swap(ids[i], ids[j]);
    result.selected.push_back(ids[i]);
    result.steps.push_back({ids[i], 0.0, 0});
  }
  return result;
}

inline SelectionResult baseline_random(std::span<const TrainingInstance> instances, std::size_t k,
                                       std::uint64_t seed) {
  return baseline_random(instances.size(), k, seed);
}

inline std::size_t instruction_length(const TrainingInstance& inst, const TokenizerPolicy& policy) {
  return tokenize(inst.instruction, policy).size();
}

/// Top-k by instruction token count.
inline SelectionResult baseline_longest(std::span<const TrainingInstance> instances, std::size_t k,
                                        const TokenizerPolicy& policy = {}) {
  std::vector<double> lengths;
  lengths.reserve(instances.size());
  for (const auto& inst : instances) lengths.push_back(static_cast<double>(instruction_length(inst, policy)));
  return detail::top_k(lengths, k);
}

/// Top-k by a supplied per-instance score (quality, perplexity, ...).
inline SelectionResult baseline_quality_topk(std::span<const double> scores, std::size_t k) {
  return detail::top_k(scores, k);
}

/// Fills the coverage fields of a result (e.g. from a baseline) against the
/// graph's initial adjacency, crediting each n-gram to the first step that
/// reaches it.
inline SelectionResult annotate_coverage(SelectionResult result, const BipartiteGraph& graph) {
  std::vector<char> seen(graph.ngram_count(), 0);
  result.covered_ngrams = 0;
  result.initial_ngrams = graph.ngram_count();
  for (auto& step : result.steps) {
    step.newly_covered = 0;
    for (NGramId v : graph.initial_neighbors(step.id)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++step.newly_covered;
      }
    }
    result.covered_ngrams += step.newly_covered;
  }
  return result;
}

}  // namespace graphfilter
