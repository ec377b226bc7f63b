#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "graphfilter/error.hpp"
#include "graphfilter/tokenizer.hpp"

namespace graphfilter {

struct TrainingInstance {
  std::size_t id = 0;
  std::string instruction;
  std::string response;
  // The input line exactly as read (without its newline), so selected records
  // can be written back unchanged.
  std::string raw;
};

enum class ContentSide { instruction, response, both };

inline const char* to_string(ContentSide side) {
  switch (side) {
    case ContentSide::instruction: return "instruction";
    case ContentSide::response: return "response";
    case ContentSide::both: return "both";
  }
  return "?";
}

inline std::optional<ContentSide> content_side_from_name(std::string_view name) {
  if (name == "instruction") return ContentSide::instruction;
  if (name == "response") return ContentSide::response;
  if (name == "both") return ContentSide::both;
  return std::nullopt;
}

inline constexpr int kMaxNGramOrder = 3;

using OrderSet = std::set<int>;

inline void validate_orders(const OrderSet& orders) {
  if (orders.empty()) throw Error(ErrorKind::config, "n-gram order set is empty");
  for (int n : orders) {
    if (n < 1 || n > kMaxNGramOrder) {
      throw Error(ErrorKind::config,
                  "n-gram order " + std::to_string(n) + " outside {1,2,3}");
    }
  }
}

class NGram {
 public:
  NGram() = default;
  explicit NGram(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty() || tokens_.size() > static_cast<std::size_t>(kMaxNGramOrder)) {
      throw Error(ErrorKind::domain, "n-gram order must be 1..3");
    }
  }
  NGram(std::initializer_list<Token> tokens) : NGram(std::vector<Token>(tokens)) {}

  int order() const { return static_cast<int>(tokens_.size()); }
  const std::vector<Token>& tokens() const { return tokens_; }

  std::string joined(std::string_view sep = " ") const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i) out += sep;
      out += tokens_[i];
    }
    return out;
  }

  // Order is the token count, so comparing token sequences compares orders.
  auto operator<=>(const NGram&) const = default;
  bool operator==(const NGram&) const = default;

 private:
  std::vector<Token> tokens_;
};

// Invokes `visit(offset, order)` for every contiguous window of each requested
// order, order-major then left to right. Windows touching a boundary token are
// skipped.
template <typename T, typename IsBoundary, typename Visit>
void for_each_window(std::span<const T> tokens, const OrderSet& orders,
                     IsBoundary is_boundary, Visit visit) {
  for (int n : orders) {
    const auto order = static_cast<std::size_t>(n);
    if (tokens.size() < order) continue;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      bool crosses = false;
      for (std::size_t j = i; j < i + order; ++j) {
        if (is_boundary(tokens[j])) {
          crosses = true;
          break;
        }
      }
      if (!crosses) visit(i, n);
    }
  }
}

/// Counts every n-gram of the requested orders. For a boundary-free sequence
/// of L tokens the order-n counts sum to max(0, L - n + 1).
inline std::map<NGram, std::size_t> extract_ngrams(std::span<const Token> tokens,
                                                   const OrderSet& orders) {
  validate_orders(orders);
  std::map<NGram, std::size_t> counts;
  for_each_window(
      tokens, orders, [](const Token& t) { return is_boundary(t); },
      [&](std::size_t offset, int order) {
        auto window = tokens.subspan(offset, static_cast<std::size_t>(order));
        ++counts[NGram(std::vector<Token>(window.begin(), window.end()))];
      });
  return counts;
}

inline std::string select_content(const TrainingInstance& instance, ContentSide side) {
  switch (side) {
    case ContentSide::instruction: return instance.instruction;
    case ContentSide::response: return instance.response;
    case ContentSide::both: {
      std::string text = instance.instruction;
      text += ' ';
      text += kBoundaryToken;
      text += ' ';
      text += instance.response;
      return text;
    }
  }
  return {};
}

namespace detail {

inline bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

inline std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

inline std::string text_field(const nlohmann::json& record, std::size_t line_no,
                              std::initializer_list<const char*> names) {
  for (const char* name : names) {
    auto it = record.find(name);
    if (it == record.end()) continue;
    if (!it->is_string()) {
      throw Error(ErrorKind::input,
                  line_error(line_no, std::string("field \"") + name + "\" is not a string"));
    }
    return it->get<std::string>();
  }
  throw Error(ErrorKind::input,
              line_error(line_no, std::string("record missing \"") + *names.begin() + "\""));
}

}  // namespace detail

/// Reads line-delimited JSON records with "instruction" and "response"
/// ("output" accepted as an alias). Blank lines are skipped; every error names
/// the 1-based line it was found on.
inline std::vector<TrainingInstance> load_dataset(std::istream& in) {
  std::vector<TrainingInstance> instances;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::blank(line)) continue;
    if (!utf8::valid(line)) {
      throw Error(ErrorKind::input, detail::line_error(line_no, "invalid UTF-8"));
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::input, detail::line_error(line_no, e.what()));
    }
    if (!record.is_object()) {
      throw Error(ErrorKind::input, detail::line_error(line_no, "record is not an object"));
    }
    TrainingInstance inst;
    inst.id = instances.size();
    inst.instruction = detail::text_field(record, line_no, {"instruction"});
    inst.response = detail::text_field(record, line_no, {"response", "output"});
    if (tokenize(inst.instruction, TokenizerPolicy::whitespace()).empty()) {
      throw Error(ErrorKind::input, detail::line_error(line_no, "empty instruction"));
    }
    inst.raw = line;
    instances.push_back(std::move(inst));
  }
  if (in.bad()) throw Error(ErrorKind::input, "read failure");
  return instances;
}

inline std::vector<TrainingInstance> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, "cannot open " + path);
  try {
    return load_dataset(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

inline std::vector<TrainingInstance> load_dataset_from_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_dataset(in);
}

/// Builds instances directly from in-memory pairs. The raw record is
/// synthesized as a JSON object.
inline std::vector<TrainingInstance> make_instances(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<TrainingInstance> out;
  out.reserve(pairs.size());
  for (const auto& [instruction, response] : pairs) {
    if (tokenize(instruction, TokenizerPolicy::whitespace()).empty()) {
      throw Error(ErrorKind::input, "record " + std::to_string(out.size()) + ": empty instruction");
    }
    nlohmann::json j = {{"instruction", instruction}, {"response", response}};
    out.push_back({out.size(), instruction, response, j.dump()});
  }
  return out;
}

}  // namespace graphfilter
