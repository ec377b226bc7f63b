#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphfilter/corpus.hpp"
#include "graphfilter/error.hpp"
#include "graphfilter/tokenizer.hpp"

namespace graphfilter {

using SentenceId = std::uint32_t;
using NGramId = std::uint32_t;

/// Corpus-global n-gram statistics, computed once at build time and never
/// touched by graph mutation.
///
/// tf[v] is the number of occurrences of v anywhere in the corpus (not a
/// per-sentence frequency), df[v] the number of sentences containing v, and
/// tfidf[v] = tf[v] * log(N / df[v]) in the configured log base (natural by
/// default).
struct CorpusStats {
  std::size_t sentence_count = 0;
  std::vector<std::size_t> tf;
  std::vector<std::size_t> df;
  std::vector<double> tfidf;

  std::size_t ngram_count() const { return tf.size(); }

  // Recomputes the weights with logarithms in `base`. Every weight is scaled
  // by the same factor 1 / ln(base).
  CorpusStats with_log_base(double base) const {
    if (!(base > 0.0) || base == 1.0 || !std::isfinite(base)) {
      throw Error(ErrorKind::domain, "log base must be positive, finite and != 1");
    }
    CorpusStats out = *this;
    const double scale = std::log(base);
    for (std::size_t v = 0; v < tf.size(); ++v) {
      out.tfidf[v] = static_cast<double>(tf[v]) *
                     std::log(static_cast<double>(sentence_count) / static_cast<double>(df[v])) /
                     scale;
    }
    return out;
  }

  CorpusStats scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
      throw Error(ErrorKind::domain, "weight scale must be positive and finite");
    }
    CorpusStats out = *this;
    for (double& w : out.tfidf) w *= factor;
    return out;
  }

  bool operator==(const CorpusStats&) const = default;
};

inline double tfidf_weight(NGramId v, const CorpusStats& stats) {
  if (v >= stats.tfidf.size()) {
    throw Error(ErrorKind::domain, "unknown n-gram id " + std::to_string(v));
  }
  return stats.tfidf[v];
}

/// What one call to remove_selected took out of the graph.
struct RemovalRecord {
  std::vector<NGramId> covered;       // n-grams that were adjacent to the selected sentence
  std::vector<SentenceId> affected;   // other live sentences that lost at least one edge
};

/// Sentence / n-gram bipartite graph.
///
/// Adjacency lists are fixed at build time and kept sorted by id; the live
/// graph is the subgraph induced by the live sentence and n-gram flags, so an
/// edge exists exactly when both endpoints are live. Per-sentence live degrees
/// and the live edge count are maintained incrementally.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  std::size_t sentence_count() const { return sentence_adj_.size(); }
  std::size_t ngram_count() const { return ngram_adj_.size(); }
  std::size_t live_sentence_count() const { return live_sentences_; }
  std::size_t live_ngram_count() const { return live_ngrams_; }
  std::size_t edge_count() const { return edges_; }

  bool sentence_live(SentenceId u) const {
    return u < sentence_live_.size() && sentence_live_[u];
  }
  bool ngram_live(NGramId v) const { return v < ngram_live_.size() && ngram_live_[v]; }

  std::size_t degree(SentenceId u) const {
    require_live(u);
    return degree_[u];
  }

  // Visits the live neighbors of u in ascending id order.
  template <typename Visit>
  void for_each_neighbor(SentenceId u, Visit visit) const {
    require_live(u);
    for (NGramId v : sentence_adj_[u]) {
      if (ngram_live_[v]) visit(v);
    }
  }

  std::vector<NGramId> neighbors(SentenceId u) const {
    std::vector<NGramId> out;
    out.reserve(degree(u));
    for_each_neighbor(u, [&](NGramId v) { out.push_back(v); });
    return out;
  }

  // Adjacency as built, regardless of later removals.
  std::span<const NGramId> initial_neighbors(SentenceId u) const {
    if (u >= sentence_adj_.size()) {
      throw Error(ErrorKind::domain, "unknown sentence id " + std::to_string(u));
    }
    return sentence_adj_[u];
  }
  std::span<const SentenceId> initial_sentences(NGramId v) const {
    if (v >= ngram_adj_.size()) {
      throw Error(ErrorKind::domain, "unknown n-gram id " + std::to_string(v));
    }
    return ngram_adj_[v];
  }

  NGram ngram(NGramId v) const {
    if (v >= ngram_tokens_.size()) {
      throw Error(ErrorKind::domain, "unknown n-gram id " + std::to_string(v));
    }
    const auto& key = ngram_tokens_[v];
    std::vector<Token> tokens;
    for (int i = 0; i < key.order; ++i) tokens.push_back(vocabulary_[key.ids[i]]);
    return NGram(std::move(tokens));
  }

  /// Selects u: removes it, every live n-gram adjacent to it, and all edges
  /// incident to either. Returns the removed n-grams and the other sentences
  /// whose adjacency shrank, both sorted ascending.
  RemovalRecord remove_selected(SentenceId u) {
    require_live(u);
    RemovalRecord record;
    sentence_live_[u] = 0;
    --live_sentences_;
    edges_ -= degree_[u];
    degree_[u] = 0;
    for (NGramId v : sentence_adj_[u]) {
      if (!ngram_live_[v]) continue;
      ngram_live_[v] = 0;
      --live_ngrams_;
      record.covered.push_back(v);
      for (SentenceId w : ngram_adj_[v]) {
        if (!sentence_live_[w]) continue;
        --degree_[w];
        --edges_;
        if (!mark_[w]) {
          mark_[w] = 1;
          record.affected.push_back(w);
        }
      }
    }
    for (SentenceId w : record.affected) mark_[w] = 0;
    std::sort(record.affected.begin(), record.affected.end());
    return record;
  }

  /// Full consistency walk: live degrees, edge count, live counters and the
  /// symmetry of the two adjacency directions. Returns an empty string when
  /// consistent, else a description of the first violation.
  std::string audit() const {
    std::size_t edges = 0;
    std::size_t live_u = 0;
    for (SentenceId u = 0; u < sentence_adj_.size(); ++u) {
      if (!sentence_live_[u]) {
        if (degree_[u] != 0) return "dead sentence " + std::to_string(u) + " has degree";
        continue;
      }
      ++live_u;
      std::size_t deg = 0;
      for (NGramId v : sentence_adj_[u]) {
        if (!std::binary_search(ngram_adj_[v].begin(), ngram_adj_[v].end(), u)) {
          return "asymmetric edge " + std::to_string(u) + "-" + std::to_string(v);
        }
        if (ngram_live_[v]) ++deg;
      }
      if (deg != degree_[u]) return "degree mismatch at sentence " + std::to_string(u);
      edges += deg;
    }
    std::size_t edges_from_ngrams = 0;
    std::size_t live_v = 0;
    for (NGramId v = 0; v < ngram_adj_.size(); ++v) {
      for (SentenceId u : ngram_adj_[v]) {
        if (!std::binary_search(sentence_adj_[u].begin(), sentence_adj_[u].end(), v)) {
          return "asymmetric edge " + std::to_string(u) + "-" + std::to_string(v);
        }
        if (ngram_live_[v] && sentence_live_[u]) ++edges_from_ngrams;
      }
      if (ngram_live_[v]) ++live_v;
    }
    if (edges != edges_ || edges_from_ngrams != edges_) return "edge count mismatch";
    if (live_u != live_sentences_) return "live sentence count mismatch";
    if (live_v != live_ngrams_) return "live n-gram count mismatch";
    return {};
  }

  /// Writes live edges as "sentence-id<TAB>n-gram tokens joined by spaces",
  /// one per line, ordered by sentence then n-gram id.
  void dump_edges(std::ostream& out) const {
    for (SentenceId u = 0; u < sentence_adj_.size(); ++u) {
      if (!sentence_live_[u]) continue;
      for (NGramId v : sentence_adj_[u]) {
        if (ngram_live_[v]) out << u << '\t' << ngram(v).joined() << '\n';
      }
    }
  }

 private:
  struct NGramKey {
    std::array<std::uint32_t, kMaxNGramOrder> ids{};
    int order = 0;
    bool operator==(const NGramKey&) const = default;
  };
  struct NGramKeyHash {
    std::size_t operator()(const NGramKey& k) const noexcept {
      std::uint64_t h = 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k.order + 1);
      for (std::uint32_t id : k.ids) {
        h ^= id + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };

  void require_live(SentenceId u) const {
    if (!sentence_live(u)) {
      throw Error(ErrorKind::domain, "sentence " + std::to_string(u) + " is not live");
    }
  }

  friend struct GraphBuilder;

  std::vector<std::vector<NGramId>> sentence_adj_;
  std::vector<std::vector<SentenceId>> ngram_adj_;
  std::vector<char> sentence_live_;
  std::vector<char> ngram_live_;
  std::vector<std::uint32_t> degree_;
  std::vector<char> mark_;
  std::size_t live_sentences_ = 0;
  std::size_t live_ngrams_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::string> vocabulary_;
  std::vector<NGramKey> ngram_tokens_;
};

struct BuildOptions {
  ContentSide side = ContentSide::instruction;
  OrderSet orders{1, 2, 3};
  TokenizerPolicy policy{};
};

struct BuiltGraph {
  BipartiteGraph graph;
  CorpusStats stats;
};

struct GraphBuilder {
  static BuiltGraph build(std::span<const TrainingInstance> instances, const BuildOptions& options) {
    if (instances.empty()) throw Error(ErrorKind::input, "cannot build a graph from zero instances");
    validate_orders(options.orders);
    if (instances.size() > std::numeric_limits<SentenceId>::max()) {
      throw Error(ErrorKind::input, "too many instances");
    }

    constexpr std::uint32_t kBoundaryId = std::numeric_limits<std::uint32_t>::max();
    BuiltGraph out;
    BipartiteGraph& g = out.graph;
    CorpusStats& stats = out.stats;
    const std::size_t n = instances.size();
    g.sentence_adj_.resize(n);

    std::unordered_map<std::string, std::uint32_t> token_ids;
    std::unordered_map<BipartiteGraph::NGramKey, NGramId, BipartiteGraph::NGramKeyHash> ngram_ids;
    std::vector<std::uint32_t> ids;
    std::vector<NGramId> occurrences;

    for (std::size_t u = 0; u < n; ++u) {
      const auto tokens = tokenize(select_content(instances[u], options.side), options.policy);
      ids.clear();
      for (const Token& t : tokens) {
        if (is_boundary(t)) {
          ids.push_back(kBoundaryId);
          continue;
        }
        auto [it, inserted] = token_ids.try_emplace(t, static_cast<std::uint32_t>(g.vocabulary_.size()));
        if (inserted) g.vocabulary_.push_back(t);
        ids.push_back(it->second);
      }

      occurrences.clear();
      for_each_window(
          std::span<const std::uint32_t>(ids), options.orders,
          [](std::uint32_t id) { return id == kBoundaryId; },
          [&](std::size_t offset, int order) {
            BipartiteGraph::NGramKey key;
            key.order = order;
            for (int j = 0; j < order; ++j) key.ids[j] = ids[offset + j];
            auto [it, inserted] = ngram_ids.try_emplace(key, static_cast<NGramId>(g.ngram_tokens_.size()));
            if (inserted) {
              g.ngram_tokens_.push_back(key);
              stats.tf.push_back(0);
              stats.df.push_back(0);
            }
            ++stats.tf[it->second];
            occurrences.push_back(it->second);
          });

      std::sort(occurrences.begin(), occurrences.end());
      occurrences.erase(std::unique(occurrences.begin(), occurrences.end()), occurrences.end());
      for (NGramId v : occurrences) ++stats.df[v];
      g.sentence_adj_[u] = occurrences;
    }

    const std::size_t m = g.ngram_tokens_.size();
    g.ngram_adj_.resize(m);
    for (NGramId v = 0; v < m; ++v) g.ngram_adj_[v].reserve(stats.df[v]);
    for (SentenceId u = 0; u < n; ++u) {
      for (NGramId v : g.sentence_adj_[u]) g.ngram_adj_[v].push_back(u);
    }

    g.sentence_live_.assign(n, 1);
    g.ngram_live_.assign(m, 1);
    g.mark_.assign(n, 0);
    g.degree_.resize(n);
    g.edges_ = 0;
    for (SentenceId u = 0; u < n; ++u) {
      g.degree_[u] = static_cast<std::uint32_t>(g.sentence_adj_[u].size());
      g.edges_ += g.degree_[u];
    }
    g.live_sentences_ = n;
    g.live_ngrams_ = m;

    stats.sentence_count = n;
    stats.tfidf.resize(m);
    for (NGramId v = 0; v < m; ++v) {
      stats.tfidf[v] = static_cast<double>(stats.tf[v]) *
                       std::log(static_cast<double>(n) / static_cast<double>(stats.df[v]));
    }
    return out;
  }
};

/// Builds the bipartite graph over the chosen content side of each instance
/// together with the frozen TF-IDF statistics. N-gram ids are assigned in
/// first-occurrence order: by sentence, then by n-gram order, then by position.
inline BuiltGraph build_graph(std::span<const TrainingInstance> instances,
                              const BuildOptions& options = {}) {
  return GraphBuilder::build(instances, options);
}

}  // namespace graphfilter
