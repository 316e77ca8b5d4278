#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ncci/conditions.hpp"
#include "ncci/csv.hpp"

namespace ncci {

// One acceptability rating from the judgment experiment.
struct TrialRecord {
  std::string participant_id;
  std::string item_id;
  SubjectForm subject_form = SubjectForm::Pronoun;
  Number number = Number::Singular;
  int rating = 4;       // 1..7
  int trial_order = 1;  // 1..94
};

// CSV columns: participant_id,item_id,subject_form,number,rating,trial_order
std::vector<TrialRecord> parse_trials(const csv::Table& table);
std::vector<TrialRecord> read_trials(const std::string& path);

double mean(std::span<const double> xs);
// Sample (n - 1) standard deviation.
double sample_sd(std::span<const double> xs);

// (x - mean) / sample sd. Throws InputError when the column is constant.
std::vector<double> standardize(std::span<const double> xs, const std::string& name = "column");

struct ZScoredTrial {
  TrialRecord trial;
  double z_rating = 0.0;
};

struct ZScoreResult {
  std::vector<ZScoredTrial> trials;
  // Participants with fewer than two trials or a single repeated rating.
  std::vector<std::string> excluded_participants;
};

ZScoreResult zscore_by_participant(std::span<const TrialRecord> trials);

struct AcceptabilityDifference {
  std::string item_id;
  SubjectForm subject_form = SubjectForm::Pronoun;
  Number number = Number::Singular;
  double diff = 0.0;
};

/// Item-wise mean z-rating of each illusory cell minus the mean of the
/// matching control (pronoun cells vs pronoun control, np vs np). One row per
/// item and illusory condition, sorted by item then condition.
std::vector<AcceptabilityDifference> acceptability_differences(
    std::span<const TrialRecord> trials);

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, t distribution with n - 2 df
  std::size_t n = 0;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

}  // namespace ncci
