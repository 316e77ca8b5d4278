#include "ncci/text_edit.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace ncci {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

// Multi-byte UTF-8 punctuation seen in participant responses: curly quotes,
// dashes, ellipsis.
constexpr std::array<std::string_view, 7> kUnicodePunct = {
    "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99",
    "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x80\xA6"};

std::size_t leading_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(static_cast<unsigned char>(s.front()))) return 1;
  for (auto p : kUnicodePunct) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

std::size_t trailing_punct(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(static_cast<unsigned char>(s.back()))) return 1;
  for (auto p : kUnicodePunct) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  }
  return 0;
}

std::string normalize_word(std::string_view raw) {
  std::string word;
  word.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    // right single quotation mark used as an apostrophe
    if (raw.substr(i, 3) == "\xE2\x80\x99" && i > 0 && i + 3 < raw.size()) {
      word.push_back('\'');
      i += 2;
      continue;
    }
    unsigned char c = static_cast<unsigned char>(raw[i]);
    word.push_back(c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  std::string_view view(word);
  while (std::size_t n = leading_punct(view)) view.remove_prefix(n);
  while (std::size_t n = trailing_punct(view)) view.remove_suffix(n);
  return std::string(view);
}

}  // namespace

std::string TokenSequence::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

TokenSequence TokenSequence::from_tokens(std::vector<std::string> tokens) {
  TokenSequence seq;
  seq.tokens_ = std::move(tokens);
  seq.source_ = seq.joined();
  return seq;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  seq.source_ = std::string(text);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string word = normalize_word(text.substr(i, j - i));
      if (!word.empty()) seq.tokens_.push_back(std::move(word));
    }
    i = j;
  }
  return seq;
}

EditDistance dld(std::span<const std::string> a, std::span<const std::string> b,
                 DldOptions options) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return {m};
  if (m == 0) return {n};

  // Three rolling rows: i-2, i-1, i.
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      std::size_t best = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
      if (options.transpositions && i > 1 && j > 1 && a[i - 1] == b[j - 2] &&
          a[i - 2] == b[j - 1]) {
        best = std::min(best, prev2[j - 2] + 1);
      }
      cur[j] = best;
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
  }
  return {prev[m]};
}

EditDistance dld(const TokenSequence& a, const TokenSequence& b, DldOptions options) {
  return dld(std::span<const std::string>(a.tokens()), std::span<const std::string>(b.tokens()),
             options);
}

}  // namespace ncci
