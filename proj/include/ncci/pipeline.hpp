#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncci/classifier.hpp"
#include "ncci/config.hpp"
#include "ncci/design.hpp"
#include "ncci/lm_scoring.hpp"
#include "ncci/ordinal.hpp"
#include "ncci/posterior.hpp"
#include "ncci/stats.hpp"

namespace ncci {

// An anomalous sentence as presented to participants.
struct Stimulus {
  StimulusKey key;
  std::string text;
};

// CSV columns: item_id,subject_form,number,text
std::vector<Stimulus> parse_stimuli(const csv::Table& table);
std::vector<Stimulus> read_stimuli(const std::string& path);
// First perceived text seen for each (item, condition), in first-seen order.
std::vector<Stimulus> stimuli_from_corrections(std::span<const CorrectionRecord> records);

struct LinkOptions {
  NoiseParams noise;
  bool plausible_only = true;
  // Collapse corrections whose normalized tokens coincide.
  bool dedupe = false;
};

struct StimulusLinks {
  Stimulus stimulus;
  LinkValues values;
};

struct LinksResult {
  std::vector<StimulusLinks> rows;
  // Stimuli left out because no usable correction remained.
  std::vector<Stimulus> skipped;
};

/// Posterior of every (plausible) correction of each stimulus, aggregated by
/// the linking functions. Corrections join to stimuli on item and condition.
LinksResult compute_links(std::span<const Stimulus> stimuli,
                          std::span<const LabeledCorrection> corrections, SentenceScorer& scorer,
                          const LinkOptions& options);

// Columns: perceived_text,item_id,condition,n_alternatives then the selected
// link columns (f_max,f_mean,f_weighted for "all").
void write_links(std::ostream& out, std::span<const StimulusLinks> rows,
                 const std::string& link = "all");
std::map<StimulusKey, LinkValues> parse_links(const csv::Table& table);

std::map<StimulusKey, double> slor_by_stimulus(std::span<const Stimulus> stimuli,
                                               SentenceScorer& scorer, const UnigramTable& table);

struct ItemDistance {
  StimulusKey key;
  double mean_dld = 0.0;
  double acceptability_diff = 0.0;
};

struct DistanceCorrelation {
  Correlation correlation;
  std::vector<ItemDistance> rows;
  std::size_t plausible_trials = 0;
};

/// Item-wise mean edit distance of plausible corrections against the
/// item-wise acceptability difference from the matching control.
DistanceCorrelation distance_acceptability_correlation(
    std::span<const TrialRecord> trials, std::span<const LabeledCorrection> corrections);

// Fits controls, controls+fmax, controls+fmean and controls+fmax+fmean.
struct ModelFamily {
  std::vector<OrdinalFit> fits;
  std::vector<ModelRank> ranking;
};
ModelFamily fit_model_family(std::span<const DesignRow> design,
                             std::span<const std::string> controls,
                             const OrdinalOptions& options = {});

enum class Stage { Score, Classify, Posterior, Analyze, All };
Stage parse_stage(const std::string& s);

struct RunReport {
  std::vector<std::string> artifacts;  // paths relative to out_dir
  std::vector<std::string> warnings;
};

// Provenance comment written as the first line of CSV artifacts.
std::string provenance_comment(const RunConfig& config);
// Hash recorded in an artifact's provenance comment, if any.
std::optional<std::string> provenance_hash(const csv::Table& table);

/// Runs one stage (or all of them) reading inputs named by `config` and
/// writing artifacts under config.io.out_dir. `all` also writes
/// manifest.json with a SHA-256 per artifact.
RunReport run_pipeline(const RunConfig& config, Stage stage);

}  // namespace ncci
