#include "xnlu/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "xnlu/error.hpp"

namespace xnlu {

namespace {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

char32_t decode(std::string_view cp) {
  const auto b = [&](std::size_t i) { return static_cast<unsigned char>(cp[i]); };
  switch (cp.size()) {
    case 1: return b(0);
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    default: return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) | (b(3) & 0x3F);
  }
}

std::string encode(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
  return out;
}

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x137 && c % 2 == 0) return c + 1;
  if (c >= 0x139 && c <= 0x148 && c % 2 == 1) return c + 1;
  if (c >= 0x14A && c <= 0x177 && c % 2 == 0) return c + 1;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_space(char32_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0; }

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  switch (c) {
    case 0xA1: case 0xBF: case 0xAB: case 0xBB:          // ¡ ¿ « »
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
    case 0x2026: case 0x2013: case 0x2014:               // ellipsis, en dash, em dash
      return true;
    default:
      return false;
  }
}

bool is_connector(char32_t c) { return c == '.' || c == ',' || c == ':' || c == '\'' || c == '-' || c == 0x2019; }

bool is_word_char(char32_t c) { return !is_space(c) && !is_punct(c); }

struct CodePoint {
  std::string bytes;
  char32_t value;
};

std::vector<CodePoint> decode_all(std::string_view text) {
  std::vector<CodePoint> out;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t n = sequence_length(static_cast<unsigned char>(text[i]));
    if (i + n > text.size()) n = 1;
    const std::string_view cp = text.substr(i, n);
    out.push_back({std::string(cp), decode(cp)});
    i += n;
  }
  return out;
}

// Greedy longest match over a run of code points.
void segment_with_lexicon(const std::vector<std::string>& run, const WordLexicon& lexicon,
                          std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < run.size()) {
    const std::size_t longest = std::min(lexicon.max_code_points(), run.size() - i);
    std::size_t matched = 0;
    std::string candidate;
    std::string best;
    for (std::size_t len = 1; len <= longest; ++len) {
      candidate += run[i + len - 1];
      if (lexicon.contains(candidate)) {
        matched = len;
        best = candidate;
      }
    }
    if (matched == 0) {
      out.push_back(run[i]);
      ++i;
    } else {
      out.push_back(std::move(best));
      i += matched;
    }
  }
}

}  // namespace

WordLexicon::WordLexicon(const std::vector<std::string>& words) {
  for (const std::string& w : words) {
    if (w.empty()) continue;
    words_.insert(w);
    max_code_points_ = std::max(max_code_points_, utf8_code_points(w).size());
  }
}

WordLexicon WordLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file '" + path + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    words.push_back(utf8_lowercase(line.substr(start)));
  }
  return WordLexicon(words);
}

std::string utf8_lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const CodePoint& cp : decode_all(text)) {
    const char32_t l = lower(cp.value);
    out += l == cp.value ? cp.bytes : encode(l);
  }
  return out;
}

std::vector<std::string> utf8_code_points(std::string_view text) {
  std::vector<std::string> out;
  for (CodePoint& cp : decode_all(text)) out.push_back(std::move(cp.bytes));
  return out;
}

std::vector<std::string> tokenize(std::string_view text, std::string_view language, const TokenizerOptions& options) {
  const std::string normalized = options.lowercase ? utf8_lowercase(text) : std::string(text);
  const std::vector<CodePoint> cps = decode_all(normalized);
  bool any_content = false;
  for (const CodePoint& cp : cps) any_content = any_content || !is_space(cp.value);
  require(any_content, "tokenize: empty input");
  const bool dictionary = language == "th";
  require(!dictionary || (options.lexicon != nullptr && !options.lexicon->empty()),
          "tokenize: Thai text needs a lexicon");

  std::vector<std::string> tokens;
  std::vector<std::string> word;  // pending run of code points
  auto flush = [&] {
    if (word.empty()) return;
    if (dictionary) {
      segment_with_lexicon(word, *options.lexicon, tokens);
    } else {
      std::string joined;
      for (const std::string& w : word) joined += w;
      tokens.push_back(std::move(joined));
    }
    word.clear();
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i].value;
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      const bool inside = !dictionary && is_connector(c) && !word.empty() && i + 1 < cps.size() &&
                          is_word_char(cps[i + 1].value);
      if (inside) {
        word.push_back(cps[i].bytes);
      } else {
        flush();
        tokens.push_back(cps[i].bytes);
      }
    } else {
      word.push_back(cps[i].bytes);
    }
  }
  flush();
  return tokens;
}

}  // namespace xnlu
