#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace graphfilter {

using Token = std::string;

// Separator emitted between instruction and response when both sides are
// selected. Tokenizers turn it into kBoundaryToken and n-gram windows never
// span it.
inline constexpr char32_t kBoundaryCodePoint = U'\x1E';
inline constexpr std::string_view kBoundaryToken = "\x1E";

enum class PunctuationMode {
  split,   // every punctuation code point becomes its own token
  attach,  // punctuation stays glued to the surrounding word
  drop,    // punctuation is discarded
};

struct TokenizerPolicy {
  std::string name = "default";
  bool lowercase = true;
  PunctuationMode punctuation = PunctuationMode::split;

  static TokenizerPolicy standard() { return {}; }
  static TokenizerPolicy whitespace() {
    return {"whitespace", true, PunctuationMode::attach};
  }
  static TokenizerPolicy words() { return {"words", true, PunctuationMode::drop}; }

  static std::optional<TokenizerPolicy> from_name(std::string_view name) {
    if (name == "default") return standard();
    if (name == "whitespace") return whitespace();
    if (name == "words") return words();
    return std::nullopt;
  }
};

namespace utf8 {

// Decodes one code point starting at `pos`, advancing it. Returns nullopt on
// malformed input (overlong forms, surrogates and truncation included).
inline std::optional<char32_t> decode(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2, cp = lead & 0x1F, min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3, cp = lead & 0x0F, min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4, cp = lead & 0x07, min = 0x10000;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (c & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return std::nullopt;
  }
  pos += len;
  return cp;
}

inline bool valid(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (!decode(s, pos)) return false;
  }
  return true;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Simple case folding for Latin (Basic, Latin-1, Extended-A), Greek and
// Cyrillic capitals. Everything else maps to itself.
inline char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

inline bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

inline bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20);
}

}  // namespace utf8

/// Splits text into normalized tokens under `policy`.
///
/// Tokens are separated by Unicode whitespace. Under the default policy each
/// punctuation code point is emitted as a standalone token, so
/// "Hello, world!" becomes ["hello", ",", "world", "!"]. The boundary code
/// point U+001E always becomes kBoundaryToken. Invalid UTF-8 bytes are kept
/// verbatim inside the current word.
inline std::vector<Token> tokenize(std::string_view text,
                                   const TokenizerPolicy& policy = {}) {
  std::vector<Token> tokens;
  std::string word;
  const auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back(std::move(word));
      word.clear();
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const auto cp = utf8::decode(text, pos);
    if (!cp) {
      pos = start + 1;
      word += text[start];
      continue;
    }
    const char32_t c = *cp;
    if (c == kBoundaryCodePoint) {
      flush();
      tokens.emplace_back(kBoundaryToken);
    } else if (utf8::is_space(c)) {
      flush();
    } else if (utf8::is_punctuation(c) && policy.punctuation != PunctuationMode::attach) {
      flush();
      if (policy.punctuation == PunctuationMode::split) {
        std::string punct;
        utf8::append(punct, c);
        tokens.push_back(std::move(punct));
      }
    } else {
      utf8::append(word, policy.lowercase ? utf8::to_lower(c) : c);
    }
  }
  flush();
  return tokens;
}

inline bool is_boundary(std::string_view token) { return token == kBoundaryToken; }

}  // namespace graphfilter
