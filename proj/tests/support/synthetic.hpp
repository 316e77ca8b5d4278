#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ncci/classifier.hpp"
#include "ncci/lm_scoring.hpp"
#include "ncci/pipeline.hpp"
#include "ncci/stats.hpp"

namespace ncci::testing {

// Deterministic stand-in for a language model: every word carries a fixed
// log-probability derived from a hash of the word.
double word_logprob(const std::string& word);
ScoredSentence synthetic_score(const std::string& text, const std::string& model = "synthetic-lm");

// A small two-experiment study with the same item/condition structure as the
// real one: corrections of every illusory stimulus, plus acceptability
// ratings of all six cells that degrade with the cell's mean edit distance.
struct SyntheticStudy {
  std::vector<Stimulus> stimuli;
  std::vector<CorrectionRecord> corrections;
  std::vector<TrialRecord> trials;
  std::vector<ScoredSentence> scores;  // every stimulus and correction
  std::map<std::string, std::uint64_t> unigram_counts;
};

struct StudyShape {
  std::size_t items = 12;
  std::size_t correction_participants = 10;
  std::size_t rating_participants = 36;
  std::uint64_t seed = 20240611;
};

SyntheticStudy make_study(const StudyShape& shape = {});

// Writes corrections.csv, stimuli.csv, trials.csv, source_scores.jsonl,
// unigram.tsv and config.json into `dir`; returns the config path.
std::filesystem::path write_study(const SyntheticStudy& study, const std::filesystem::path& dir,
                                  const std::string& out_dir = "out");

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& p);
void spit(const std::filesystem::path& p, const std::string& content);

}  // namespace ncci::testing
