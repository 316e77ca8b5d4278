#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ncci {

/// Word-level view of a sentence. Tokens are lowercase, non-empty, and carry
/// no leading or trailing punctuation; word-internal apostrophes and hyphens
/// survive ("haven't", "white-collar").
class TokenSequence {
 public:
  TokenSequence() = default;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& source_text() const noexcept { return source_; }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  // Tokens joined by single spaces.
  std::string joined() const;

  friend bool operator==(const TokenSequence& a, const TokenSequence& b) {
    return a.tokens_ == b.tokens_;
  }

  friend TokenSequence tokenize(std::string_view text);
  static TokenSequence from_tokens(std::vector<std::string> tokens);

 private:
  std::vector<std::string> tokens_;
  std::string source_;
};

TokenSequence tokenize(std::string_view text);

struct EditDistance {
  std::size_t value = 0;
  friend auto operator<=>(const EditDistance&, const EditDistance&) = default;
};

struct DldOptions {
  // Optimal string alignment (adjacent transpositions, each substring edited
  // at most once). When false: plain Levenshtein.
  bool transpositions = true;
};

EditDistance dld(std::span<const std::string> a, std::span<const std::string> b,
                 DldOptions options = {});
EditDistance dld(const TokenSequence& a, const TokenSequence& b, DldOptions options = {});

}  // namespace ncci
