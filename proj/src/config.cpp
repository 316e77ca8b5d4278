#include "ncci/config.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "ncci/error.hpp"

namespace ncci {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key '" + where + it.key() + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

const json& section(const json& root, const char* name) {
  static const json empty = json::object();
  if (!root.contains(name)) return empty;
  const json& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root, {"scorer", "noise", "unigram", "classifier", "io", "posterior", "analysis"}, "");

  RunConfig c;
  const json& scorer = section(root, "scorer");
  reject_unknown(scorer, {"provider", "url", "model", "max_inflight", "batch_size", "timeout_seconds",
                          "scores_path"},
                 "scorer.");
  read(scorer, "provider", c.scorer.provider, "scorer.");
  read(scorer, "url", c.scorer.url, "scorer.");
  read(scorer, "model", c.scorer.model, "scorer.");
  read(scorer, "max_inflight", c.scorer.max_inflight, "scorer.");
  read(scorer, "batch_size", c.scorer.batch_size, "scorer.");
  read(scorer, "timeout_seconds", c.scorer.timeout_seconds, "scorer.");
  read(scorer, "scores_path", c.scorer.scores_path, "scorer.");

  const json& noise = section(root, "noise");
  reject_unknown(noise, {"beta"}, "noise.");
  read(noise, "beta", c.beta, "noise.");

  const json& unigram = section(root, "unigram");
  reject_unknown(unigram, {"path", "smoothing"}, "unigram.");
  read(unigram, "path", c.unigram_path, "unigram.");
  read(unigram, "smoothing", c.unigram_smoothing, "unigram.");

  const json& cls = section(root, "classifier");
  reject_unknown(cls, {"negation_lexicon", "transpositions", "outlier_sd"}, "classifier.");
  read(cls, "negation_lexicon", c.classifier.negation_lexicon, "classifier.");
  read(cls, "transpositions", c.classifier.dld.transpositions, "classifier.");
  read(cls, "outlier_sd", c.classifier.outlier_sd, "classifier.");

  const json& io = section(root, "io");
  reject_unknown(io, {"stimuli", "corrections", "trials", "out_dir"}, "io.");
  read(io, "stimuli", c.io.stimuli, "io.");
  read(io, "corrections", c.io.corrections, "io.");
  read(io, "trials", c.io.trials, "io.");
  read(io, "out_dir", c.io.out_dir, "io.");

  const json& post = section(root, "posterior");
  reject_unknown(post, {"dedupe", "plausible_only", "link"}, "posterior.");
  read(post, "dedupe", c.dedupe, "posterior.");
  read(post, "plausible_only", c.plausible_only, "posterior.");
  read(post, "link", c.link, "posterior.");

  const json& analysis = section(root, "analysis");
  reject_unknown(analysis, {"controls"}, "analysis.");
  read(analysis, "controls", c.controls, "analysis.");

  if (c.scorer.provider != "file" && c.scorer.provider != "http") {
    throw ConfigError("scorer.provider must be 'file' or 'http'");
  }
  if (c.scorer.max_inflight == 0) throw ConfigError("scorer.max_inflight must be positive");
  if (c.scorer.batch_size == 0) throw ConfigError("scorer.batch_size must be positive");
  if (!(c.beta > 0.0)) throw ConfigError("noise.beta must be positive");
  if (!(c.classifier.outlier_sd > 0.0)) throw ConfigError("classifier.outlier_sd must be positive");
  if (c.link != "max" && c.link != "mean" && c.link != "weighted" && c.link != "all") {
    throw ConfigError("posterior.link must be max, mean, weighted or all");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open config", path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_json(const RunConfig& c, int indent) {
  json j;  // std::map-backed: keys come out sorted
  j["scorer"] = {{"provider", c.scorer.provider},       {"url", c.scorer.url},
                 {"model", c.scorer.model},             {"max_inflight", c.scorer.max_inflight},
                 {"batch_size", c.scorer.batch_size},   {"timeout_seconds", c.scorer.timeout_seconds},
                 {"scores_path", c.scorer.scores_path}};
  j["noise"] = {{"beta", c.beta}};
  j["unigram"] = {{"path", c.unigram_path}, {"smoothing", c.unigram_smoothing}};
  j["classifier"] = {{"negation_lexicon", c.classifier.negation_lexicon},
                     {"transpositions", c.classifier.dld.transpositions},
                     {"outlier_sd", c.classifier.outlier_sd}};
  j["io"] = {{"stimuli", c.io.stimuli},
             {"corrections", c.io.corrections},
             {"trials", c.io.trials},
             {"out_dir", c.io.out_dir}};
  j["posterior"] = {{"dedupe", c.dedupe}, {"plausible_only", c.plausible_only}, {"link", c.link}};
  j["analysis"] = {{"controls", c.controls}};
  return j.dump(indent);
}

std::string config_hash(const RunConfig& config) {
  // where artifacts land does not change their content
  RunConfig hashed = config;
  hashed.io.out_dir.clear();
  return sha256_hex(config_json(hashed));
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open file for hashing", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace ncci
