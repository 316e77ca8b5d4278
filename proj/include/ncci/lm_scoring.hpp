#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ncci/text_edit.hpp"

namespace ncci {

// Natural-log sentence probability from one language model.
struct ScoredSentence {
  std::string text;
  std::string model_id;
  std::vector<std::string> tokens;  // model (subword) tokens, may be empty
  std::vector<double> token_logprobs;
  double total_logprob = 0.0;

  // Throws InputError unless every token logprob is <= 0, the list is
  // non-empty for non-empty text, and the total matches the per-token sum.
  void validate(double tolerance = 1e-9) const;

  friend bool operator==(const ScoredSentence&, const ScoredSentence&) = default;
};

// Builds a ScoredSentence whose total is the compensated sum of the per-token
// values.
ScoredSentence make_scored(std::string text, std::string model_id,
                           std::vector<std::string> tokens, std::vector<double> token_logprobs);

// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

// Converts a logprob reported in `base` ("e", "2", "10") to natural log.
double to_natural_log(double value, const std::string& base);

class SentenceScorer {
 public:
  virtual ~SentenceScorer() = default;
  virtual std::string model_id() const = 0;
  // One result per input, in input order.
  virtual std::vector<ScoredSentence> score(std::span<const std::string> texts) = 0;
};

/// Scores every text with `provider`, enforcing the contract: non-empty input,
/// non-empty texts, order-preserving output, validated totals.
std::vector<ScoredSentence> score_sentences(std::span<const std::string> texts,
                                            SentenceScorer& provider);

// Score files are JSON lines:
// {"text","model","tokens","token_logprobs","total_logprob"}, natural log.
std::string to_jsonl(const ScoredSentence& s);
ScoredSentence from_jsonl(const std::string& line);
void write_score_file(const std::string& path, std::span<const ScoredSentence> scores);
std::vector<ScoredSentence> read_score_file(const std::string& path);

// Word counts behind unigram probabilities p_u(w).
class UnigramTable {
 public:
  UnigramTable() = default;
  UnigramTable(std::map<std::string, std::uint64_t> counts, bool smoothing = true);

  const std::map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t vocab_size() const noexcept { return vocab_size_; }
  bool smoothing() const noexcept { return smoothing_; }
  void set_smoothing(bool on) noexcept { smoothing_ = on; }
  // Defaults to the number of distinct observed tokens.
  void set_vocab_size(std::uint64_t v);

  std::uint64_t count(const std::string& token) const;
  // Add-one: (c + 1) / (total + vocab_size + 1). Unsmoothed OOV throws.
  double log_prob(const std::string& token) const;

  // TSV: token<TAB>count, one per line, sorted by token.
  void write_tsv(std::ostream& out) const;
  static UnigramTable parse_tsv(std::istream& in, bool smoothing = true);
  static UnigramTable read_tsv(const std::string& path, bool smoothing = true);

  friend bool operator==(const UnigramTable&, const UnigramTable&) = default;

 private:
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t vocab_size_ = 0;
  bool smoothing_ = true;
};

// Aggregates counts from raw text (each line tokenized like sentences are).
UnigramTable build_unigram_table(std::istream& corpus, bool smoothing = true);
UnigramTable build_unigram_table(std::span<const std::string> tokens, bool smoothing = true);

// Sum of log unigram probabilities over the words of a sentence.
double unigram_logprob(const TokenSequence& tokens, const UnigramTable& table);

struct SlorValue {
  double value = 0.0;
};

// (log p_m(s) - sum log p_u(w)) / |s| where |s| counts normalized words.
SlorValue slor(double model_logprob, double unigram_logprob_sum, std::size_t word_count);
SlorValue slor(const ScoredSentence& sentence, const TokenSequence& tokens,
               const UnigramTable& table);

}  // namespace ncci
