#include "ncci/lm_scoring.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ncci/error.hpp"

namespace ncci {

using json = nlohmann::json;

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

double to_natural_log(double value, const std::string& base) {
  if (base == "e" || base == "ln" || base == "natural") return value;
  if (base == "2") return value * std::log(2.0);
  if (base == "10") return value * std::log(10.0);
  throw ProviderError("unsupported log base '" + base + "'");
}

void ScoredSentence::validate(double tolerance) const {
  if (!text.empty() && token_logprobs.empty()) {
    throw InputError("scored sentence has no token logprobs: \"" + text + "\"");
  }
  for (double lp : token_logprobs) {
    if (!std::isfinite(lp) || lp > 0.0) {
      throw InputError("token logprob out of range (must be finite and <= 0) for \"" + text + "\"");
    }
  }
  const double sum = compensated_sum(token_logprobs);
  if (!(std::abs(sum - total_logprob) <= tolerance)) {
    throw InputError("total_logprob does not equal the per-token sum for \"" + text + "\"");
  }
}

ScoredSentence make_scored(std::string text, std::string model_id,
                           std::vector<std::string> tokens, std::vector<double> token_logprobs) {
  ScoredSentence s;
  s.text = std::move(text);
  s.model_id = std::move(model_id);
  s.tokens = std::move(tokens);
  s.token_logprobs = std::move(token_logprobs);
  s.total_logprob = compensated_sum(s.token_logprobs);
  return s;
}

std::vector<ScoredSentence> score_sentences(std::span<const std::string> texts,
                                            SentenceScorer& provider) {
  if (texts.empty()) throw InputError("score_sentences: no texts given");
  for (const auto& t : texts) {
    if (t.empty()) throw InputError("score_sentences: empty text");
  }
  auto scored = provider.score(texts);
  if (scored.size() != texts.size()) {
    throw ProviderError("provider returned " + std::to_string(scored.size()) + " results for " +
                        std::to_string(texts.size()) + " texts");
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (scored[i].text != texts[i]) {
      throw ProviderError("provider result order mismatch at index " + std::to_string(i));
    }
    try {
      scored[i].validate();
    } catch (const InputError& e) {
      throw ProviderError(std::string("malformed provider result: ") + e.what());
    }
  }
  return scored;
}

std::string to_jsonl(const ScoredSentence& s) {
  json j;
  j["text"] = s.text;
  j["model"] = s.model_id;
  j["tokens"] = s.tokens;
  j["token_logprobs"] = s.token_logprobs;
  j["total_logprob"] = s.total_logprob;
  return j.dump();
}

ScoredSentence from_jsonl(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("score entry is not a JSON object");
  ScoredSentence s;
  try {
    s.text = j.at("text").get<std::string>();
    s.model_id = j.at("model").get<std::string>();
    if (j.contains("tokens")) s.tokens = j.at("tokens").get<std::vector<std::string>>();
    s.token_logprobs = j.at("token_logprobs").get<std::vector<double>>();
    s.total_logprob = j.contains("total_logprob") ? j.at("total_logprob").get<double>()
                                                  : compensated_sum(s.token_logprobs);
  } catch (const json::exception& e) {
    throw InputError(std::string("score entry has a missing or mistyped field: ") + e.what());
  }
  if (!s.tokens.empty() && s.tokens.size() != s.token_logprobs.size()) {
    throw InputError("score entry has " + std::to_string(s.tokens.size()) + " tokens but " +
                     std::to_string(s.token_logprobs.size()) + " logprobs");
  }
  return s;
}

void write_score_file(const std::string& path, std::span<const ScoredSentence> scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingInputError("cannot write score file", path);
  for (const auto& s : scores) out << to_jsonl(s) << '\n';
}

std::vector<ScoredSentence> read_score_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open score file", path);
  std::vector<ScoredSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(from_jsonl(line));
      // service numerics are only accurate to ~1e-6 in the stored total;
      // past that check the total is recomputed from the tokens
      out.back().validate(1e-6);
      out.back().total_logprob = compensated_sum(out.back().token_logprobs);
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unigram table

UnigramTable::UnigramTable(std::map<std::string, std::uint64_t> counts, bool smoothing)
    : counts_(std::move(counts)), smoothing_(smoothing) {
  for (const auto& [token, c] : counts_) {
    if (c == 0) throw InputError("unigram count for '" + token + "' must be positive");
    total_ += c;
  }
  if (total_ == 0) throw InputError("unigram table is empty");
  vocab_size_ = counts_.size();
}

void UnigramTable::set_vocab_size(std::uint64_t v) {
  if (v == 0) throw InputError("vocab_size must be positive");
  vocab_size_ = v;
}

std::uint64_t UnigramTable::count(const std::string& token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

double UnigramTable::log_prob(const std::string& token) const {
  const auto c = static_cast<double>(count(token));
  if (smoothing_) {
    return std::log((c + 1.0) /
                    (static_cast<double>(total_) + static_cast<double>(vocab_size_) + 1.0));
  }
  if (c == 0.0) {
    throw InputError("token '" + token + "' is not in the unigram table and smoothing is off");
  }
  // a single correctly rounded quotient: scaling every count by k gives the
  // identical value
  return std::log(c / static_cast<double>(total_));
}

void UnigramTable::write_tsv(std::ostream& out) const {
  for (const auto& [token, c] : counts_) out << token << '\t' << c << '\n';
}

UnigramTable UnigramTable::parse_tsv(std::istream& in, bool smoothing) {
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    auto bad = [&](const std::string& why) {
      return InputError("unigram TSV line " + std::to_string(lineno) + ": " + why);
    };
    if (tab == std::string::npos || tab == 0) throw bad("expected token<TAB>count");
    const std::string token = line.substr(0, tab);
    const std::string num = line.substr(tab + 1);
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) {
      throw bad("count '" + num + "' is not a non-negative integer");
    }
    std::uint64_t c = 0;
    try {
      c = std::stoull(num);
    } catch (const std::exception&) {
      throw bad("count '" + num + "' is out of range");
    }
    if (c == 0) throw bad("count must be positive");
    counts[token] += c;
  }
  if (counts.empty()) throw InputError("unigram TSV has no entries");
  return UnigramTable(std::move(counts), smoothing);
}

UnigramTable UnigramTable::read_tsv(const std::string& path, bool smoothing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open unigram table", path);
  try {
    return parse_tsv(in, smoothing);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

UnigramTable build_unigram_table(std::span<const std::string> tokens, bool smoothing) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& raw : tokens) {
    for (const auto& t : tokenize(raw)) ++counts[t];
  }
  if (counts.empty()) throw InputError("cannot build a unigram table from an empty corpus");
  return UnigramTable(std::move(counts), smoothing);
}

UnigramTable build_unigram_table(std::istream& corpus, bool smoothing) {
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  while (std::getline(corpus, line)) {
    for (const auto& t : tokenize(line)) ++counts[t];
  }
  if (counts.empty()) throw InputError("cannot build a unigram table from an empty corpus");
  return UnigramTable(std::move(counts), smoothing);
}

double unigram_logprob(const TokenSequence& tokens, const UnigramTable& table) {
  if (tokens.empty()) throw InputError("unigram_logprob: empty token sequence");
  std::vector<double> logs;
  logs.reserve(tokens.size());
  for (const auto& t : tokens) logs.push_back(table.log_prob(t));
  return compensated_sum(logs);
}

SlorValue slor(double model_logprob, double unigram_logprob_sum, std::size_t word_count) {
  if (word_count == 0) throw InputError("slor: empty sentence");
  return {(model_logprob - unigram_logprob_sum) / static_cast<double>(word_count)};
}

SlorValue slor(const ScoredSentence& sentence, const TokenSequence& tokens,
               const UnigramTable& table) {
  if (tokens.empty()) throw InputError("slor: empty token sequence");
  return slor(sentence.total_logprob, unigram_logprob(tokens, table), tokens.size());
}

}  // namespace ncci
