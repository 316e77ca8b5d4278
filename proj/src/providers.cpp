#include "ncci/providers.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ncci/error.hpp"

namespace ncci {

using json = nlohmann::json;

FileScoreProvider::FileScoreProvider(const std::string& path, std::string model)
    : source_(path), model_(std::move(model)) {
  index(read_score_file(path));
}

FileScoreProvider::FileScoreProvider(std::vector<ScoredSentence> entries, std::string model)
    : source_("<memory>"), model_(std::move(model)) {
  index(std::move(entries));
}

void FileScoreProvider::index(std::vector<ScoredSentence> entries) {
  if (model_.empty()) {
    for (const auto& e : entries) {
      if (model_.empty()) {
        model_ = e.model_id;
      } else if (e.model_id != model_) {
        throw ProviderError(source_ + ": score file mixes models '" + model_ + "' and '" +
                            e.model_id + "'; select one");
      }
    }
  }
  for (auto& e : entries) {
    if (e.model_id != model_) continue;
    auto [it, inserted] = by_text_.try_emplace(e.text, e);
    if (!inserted && !(it->second == e)) {
      throw ProviderError(source_ + ": conflicting scores for \"" + e.text + "\"");
    }
  }
}

std::vector<ScoredSentence> FileScoreProvider::score(std::span<const std::string> texts) {
  std::vector<ScoredSentence> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = by_text_.find(t);
    if (it == by_text_.end()) {
      throw ProviderError(source_ + ": no score entry for \"" + t + "\"");
    }
    out.push_back(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------

HttpScoreProvider::HttpScoreProvider(HttpProviderOptions options) : options_(std::move(options)) {
  if (options_.max_inflight == 0) throw ConfigError("scorer.max_inflight must be positive");
  if (options_.batch_size == 0) throw ConfigError("scorer.batch_size must be positive");
  const std::string& url = options_.url;
  const auto scheme = url.find("://");
  const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) {
    host_ = url;
  } else {
    host_ = url.substr(0, path_start);
    base_path_ = url.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
  if (host_.size() <= host_start) throw ConfigError("scorer.url has no host: " + url);
}

std::string HttpScoreProvider::model_id() const {
  return options_.model.empty() ? reported_model_ : options_.model;
}

std::vector<ScoredSentence> HttpScoreProvider::score_batch(
    std::span<const std::string> texts) const {
  httplib::Client client(host_);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  json body;
  body["sentences"] = std::vector<std::string>(texts.begin(), texts.end());
  auto res = client.Post(base_path_ + "/v1/score", body.dump(), "application/json");
  if (!res) {
    throw ProviderError("scorer at " + options_.url +
                        " is unavailable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProviderError("scorer returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  if (!res->has_header("X-Logprob-Base")) {
    throw ProviderError("scorer response does not declare X-Logprob-Base");
  }
  const std::string base = res->get_header_value("X-Logprob-Base");

  json j;
  try {
    j = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("scorer response is not JSON: ") + e.what());
  }
  std::vector<ScoredSentence> out;
  try {
    const std::string model = j.at("model").get<std::string>();
    if (!options_.model.empty() && model != options_.model) {
      throw ProviderError("scorer serves model '" + model + "' but '" + options_.model +
                          "' was configured");
    }
    const auto& results = j.at("results");
    if (!results.is_array() || results.size() != texts.size()) {
      throw ProviderError("scorer returned a results list of the wrong length");
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto& r = results[i];
      auto tokens = r.contains("tokens") ? r.at("tokens").get<std::vector<std::string>>()
                                         : std::vector<std::string>{};
      auto lps = r.at("token_logprobs").get<std::vector<double>>();
      for (double& lp : lps) lp = to_natural_log(lp, base);
      ScoredSentence s = make_scored(texts[i], model, std::move(tokens), std::move(lps));
      if (r.contains("total_logprob")) {
        const double reported = to_natural_log(r.at("total_logprob").get<double>(), base);
        if (!(std::abs(reported - s.total_logprob) <= 1e-6)) {
          throw ProviderError("scorer total_logprob disagrees with its token logprobs for \"" +
                              texts[i] + "\"");
        }
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed scorer response: ") + e.what());
  }
  return out;
}

std::vector<ScoredSentence> HttpScoreProvider::score(std::span<const std::string> texts) {
  const std::size_t batch = options_.batch_size;
  const std::size_t n_batches = (texts.size() + batch - 1) / batch;
  std::vector<std::vector<ScoredSentence>> results(n_batches);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> inflight{0};
  std::atomic<std::size_t> peak{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_batches) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const std::size_t now = inflight.fetch_add(1) + 1;
      std::size_t seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      try {
        const std::size_t begin = b * batch;
        const std::size_t len = std::min(batch, texts.size() - begin);
        results[b] = score_batch(texts.subspan(begin, len));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
      inflight.fetch_sub(1);
    }
  };

  const std::size_t n_workers = std::min(options_.max_inflight, n_batches);
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  last_peak_ = peak.load();
  if (failure) std::rethrow_exception(failure);

  if (!results.empty() && !results.front().empty()) reported_model_ = results.front().front().model_id;
  std::vector<ScoredSentence> out;
  out.reserve(texts.size());
  for (auto& r : results) {
    for (auto& s : r) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ncci
