#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ncci/classifier.hpp"
#include "ncci/noise_model.hpp"

namespace ncci {

struct ScorerConfig {
  std::string provider = "file";  // file | http
  std::string url = "http://127.0.0.1:8000";
  std::string model;
  std::size_t max_inflight = 4;
  std::size_t batch_size = 16;
  int timeout_seconds = 120;
  // Source score file for the file provider.
  std::string scores_path;
};

struct IoConfig {
  std::string stimuli;  // optional: item_id,subject_form,number,text
  std::string corrections;
  std::string trials;
  std::string out_dir = "out";
};

// Everything a pipeline run depends on. Serialized canonically (sorted keys)
// so its hash identifies the run.
struct RunConfig {
  ScorerConfig scorer;
  double beta = 1.0;
  std::string unigram_path;
  bool unigram_smoothing = true;
  ClassifierOptions classifier;
  IoConfig io;
  bool dedupe = false;
  bool plausible_only = true;
  std::string link = "all";  // max | mean | weighted | all
  std::vector<std::string> controls = {"slor", "order", "baseline"};

  NoiseParams noise() const { return NoiseParams(beta); }
};

// Throws ConfigError on unknown keys, wrong types, or invalid values.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string config_json(const RunConfig& config, int indent = -1);
// Hex SHA-256 of the canonical config JSON, ignoring io.out_dir.
std::string config_hash(const RunConfig& config);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace ncci
