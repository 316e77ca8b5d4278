#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncci/lm_scoring.hpp"

namespace ncci {

// Serves scores from a JSON-lines score file loaded once at construction.
class FileScoreProvider : public SentenceScorer {
 public:
  // `model` filters entries when the file holds several models; empty means
  // the file must hold exactly one.
  explicit FileScoreProvider(const std::string& path, std::string model = {});
  explicit FileScoreProvider(std::vector<ScoredSentence> entries, std::string model = {});

  std::string model_id() const override { return model_; }
  std::vector<ScoredSentence> score(std::span<const std::string> texts) override;

  bool contains(const std::string& text) const { return by_text_.count(text) != 0; }
  std::size_t size() const noexcept { return by_text_.size(); }

 private:
  void index(std::vector<ScoredSentence> entries);

  std::string source_;
  std::string model_;
  std::unordered_map<std::string, ScoredSentence> by_text_;
};

struct HttpProviderOptions {
  std::string url = "http://127.0.0.1:8000";
  // Expected model id; empty accepts whatever the service reports.
  std::string model;
  std::size_t max_inflight = 4;
  std::size_t batch_size = 16;
  int timeout_seconds = 120;
};

// Client for the scoring service: POST /v1/score {"sentences": [...]}.
// The response declares its log base in the X-Logprob-Base header; values are
// converted to natural log here.
class HttpScoreProvider : public SentenceScorer {
 public:
  explicit HttpScoreProvider(HttpProviderOptions options);

  std::string model_id() const override;
  std::vector<ScoredSentence> score(std::span<const std::string> texts) override;

  // Peak number of requests observed in flight during the last score() call.
  std::size_t last_peak_inflight() const noexcept { return last_peak_; }

 private:
  std::vector<ScoredSentence> score_batch(std::span<const std::string> texts) const;

  HttpProviderOptions options_;
  std::string host_;
  std::string base_path_;
  std::string reported_model_;
  std::size_t last_peak_ = 0;
};

}  // namespace ncci
