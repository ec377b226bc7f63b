#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "graphfilter/corpus.hpp"
#include "graphfilter/error.hpp"
#include "graphfilter/tokenizer.hpp"

namespace graphfilter {

/// Per-instance quality. score = ppl_conditional / ppl_plain whenever both
/// perplexities are known; a sidecar may supply the score alone.
struct QualityRecord {
  std::size_t id = 0;
  std::optional<double> ppl_conditional;
  std::optional<double> ppl_plain;
  double score = 0.0;

  bool operator==(const QualityRecord&) const = default;
};

using QualityTable = std::map<std::size_t, QualityRecord>;

namespace detail {

inline bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace detail

/// exp of the mean negative log-probability.
inline double perplexity(std::span<const double> token_log_probs) {
  if (token_log_probs.empty()) {
    throw Error(ErrorKind::domain, "perplexity undefined for an empty sequence");
  }
  double sum = 0.0;
  for (double lp : token_log_probs) {
    if (!(lp <= 0.0)) throw Error(ErrorKind::domain, "log-probability must be <= 0");
    sum += lp;
  }
  return std::exp(-sum / static_cast<double>(token_log_probs.size()));
}

inline double superfilter_score(double ppl_conditional, double ppl_plain) {
  if (!detail::positive_finite(ppl_conditional) || !detail::positive_finite(ppl_plain)) {
    throw Error(ErrorKind::domain, "perplexities must be positive and finite");
  }
  return ppl_conditional / ppl_plain;
}

/// Reads a quality sidecar: one JSON object per line with "id" plus either
/// "ppl_conditional" and "ppl_plain", or "score". When both perplexities are
/// present the score is recomputed from them.
inline QualityTable load_quality(std::istream& in, std::size_t dataset_size) {
  QualityTable table;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::input, "line " + std::to_string(line_no) + ": " + what);
  };
  const auto number = [&](const nlohmann::json& rec, const char* key) -> std::optional<double> {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) fail(std::string("\"") + key + "\" is not a number");
    const double x = it->get<double>();
    if (!detail::positive_finite(x)) fail(std::string("\"") + key + "\" must be positive and finite");
    return x;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(e.what());
    }
    if (!rec.is_object()) fail("record is not an object");
    auto id_it = rec.find("id");
    if (id_it == rec.end() || !id_it->is_number_integer()) fail("missing integer \"id\"");
    const auto raw_id = id_it->get<long long>();
    if (raw_id < 0 || static_cast<unsigned long long>(raw_id) >= dataset_size) {
      fail("id " + std::to_string(raw_id) + " outside dataset of size " + std::to_string(dataset_size));
    }
    const auto id = static_cast<std::size_t>(raw_id);
    if (table.contains(id)) fail("duplicate id " + std::to_string(id));

    QualityRecord record;
    record.id = id;
    record.ppl_conditional = number(rec, "ppl_conditional");
    record.ppl_plain = number(rec, "ppl_plain");
    const auto score = number(rec, "score");
    if (record.ppl_conditional && record.ppl_plain) {
      record.score = superfilter_score(*record.ppl_conditional, *record.ppl_plain);
    } else if (score) {
      record.score = *score;
    } else {
      fail("need \"ppl_conditional\" and \"ppl_plain\", or \"score\"");
    }
    table.emplace(id, record);
  }
  return table;
}

inline QualityTable load_quality_file(const std::string& path, std::size_t dataset_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, "cannot open " + path);
  try {
    return load_quality(in, dataset_size);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

/// Add-one smoothed bigram model over lowercased tokens. Every instruction and
/// every response is one training sequence preceded by a start symbol.
///
///   P(w | prev) = (count(prev, w) + 1) / (count(prev, .) + |V|)
///
/// where |V| counts the distinct real tokens (the start symbol is a context
/// only, never predicted).
class BigramModel {
 public:
  BigramModel() = default;

  void add_sequence(std::span<const Token> tokens) {
    std::uint32_t prev = kStart;
    for (const Token& t : tokens) {
      const std::uint32_t id = intern(t);
      ++pair_counts_[key(prev, id)];
      ++context_counts_[prev];
      prev = id;
    }
  }

  std::size_t vocabulary_size() const { return vocab_.size(); }

  // Natural-log probability of `token` following `context` (nullopt = start).
  double log_prob(const std::optional<Token>& context, const Token& token) const {
    const std::uint32_t ctx = context ? lookup(*context) : kStart;
    const std::uint32_t id = lookup(token);
    const double pair = (ctx == kUnknown || id == kUnknown) ? 0.0 : count(pair_counts_, key(ctx, id));
    const double ctx_count = ctx == kUnknown ? 0.0 : count(context_counts_, ctx);
    return std::log((pair + 1.0) / (ctx_count + static_cast<double>(vocab_.size())));
  }

  // Perplexity of `tokens` with the first token conditioned on `context`.
  double perplexity_of(std::span<const Token> tokens, std::optional<Token> context) const {
    std::vector<double> lps;
    lps.reserve(tokens.size());
    for (const Token& t : tokens) {
      lps.push_back(log_prob(context, t));
      context = t;
    }
    return perplexity(lps);
  }

 private:
  static constexpr std::uint32_t kStart = 0xFFFFFFFEu;
  static constexpr std::uint32_t kUnknown = 0xFFFFFFFFu;

  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  template <typename Map, typename K>
  static double count(const Map& m, const K& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : static_cast<double>(it->second);
  }

  std::uint32_t intern(const Token& t) {
    auto [it, inserted] = vocab_.try_emplace(t, static_cast<std::uint32_t>(vocab_.size()));
    return it->second;
  }
  std::uint32_t lookup(const Token& t) const {
    auto it = vocab_.find(t);
    return it == vocab_.end() ? kUnknown : it->second;
  }

  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::unordered_map<std::uint64_t, std::size_t> pair_counts_;
  std::unordered_map<std::uint32_t, std::size_t> context_counts_;
};

struct BuiltinQuality {
  QualityTable records;
  std::vector<std::size_t> flagged;  // instances with an empty response
};

/// Scores every instance with the built-in bigram stand-in. The plain
/// perplexity conditions the first response token on the start symbol; the
/// conditional one conditions it on the instruction's final token. This is a
/// CPU-only substitute for neural-LM scores, not a reproduction of them.
inline BuiltinQuality builtin_quality(std::span<const TrainingInstance> instances,
                                      const TokenizerPolicy& policy = {}) {
  TokenizerPolicy lower = policy;
  lower.lowercase = true;
  std::vector<std::vector<Token>> instructions;
  std::vector<std::vector<Token>> responses;
  instructions.reserve(instances.size());
  responses.reserve(instances.size());
  BigramModel model;
  for (const auto& inst : instances) {
    instructions.push_back(tokenize(inst.instruction, lower));
    responses.push_back(tokenize(inst.response, lower));
    model.add_sequence(instructions.back());
    model.add_sequence(responses.back());
  }

  BuiltinQuality out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto id = instances[i].id;
    if (responses[i].empty()) {
      out.flagged.push_back(id);
      continue;
    }
    std::optional<Token> context;
    if (!instructions[i].empty()) context = instructions[i].back();
    QualityRecord rec;
    rec.id = id;
    rec.ppl_plain = model.perplexity_of(responses[i], std::nullopt);
    rec.ppl_conditional = model.perplexity_of(responses[i], context);
    rec.score = superfilter_score(*rec.ppl_conditional, *rec.ppl_plain);
    out.records.emplace(id, rec);
  }
  return out;
}

enum class MissingQuality { fail, median };

/// Dense score vector indexed by sentence id. Missing ids either fail or take
/// the median of the present scores.
inline std::vector<double> resolve_scores(const QualityTable& table, std::size_t dataset_size,
                                          MissingQuality missing = MissingQuality::fail) {
  std::vector<double> scores(dataset_size, 0.0);
  std::vector<char> present(dataset_size, 0);
  std::vector<double> values;
  for (const auto& [id, rec] : table) {
    if (id >= dataset_size) {
      throw Error(ErrorKind::input, "quality id " + std::to_string(id) + " outside dataset");
    }
    scores[id] = rec.score;
    present[id] = 1;
    values.push_back(rec.score);
  }
  const auto absent = static_cast<std::size_t>(std::count(present.begin(), present.end(), 0));
  if (absent == 0) return scores;
  if (missing == MissingQuality::fail || values.empty()) {
    const auto first = static_cast<std::size_t>(std::find(present.begin(), present.end(), 0) - present.begin());
    throw Error(ErrorKind::missing_quality,
                std::to_string(absent) + " instance(s) lack a quality score (first: id " +
                    std::to_string(first) + ")");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  const double median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  for (std::size_t i = 0; i < dataset_size; ++i) {
    if (!present[i]) scores[i] = median;
  }
  return scores;
}

}  // namespace graphfilter
