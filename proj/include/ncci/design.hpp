#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ncci/conditions.hpp"
#include "ncci/csv.hpp"
#include "ncci/posterior.hpp"
#include "ncci/stats.hpp"

namespace ncci {

// One anomalous stimulus: item crossed with an illusory condition.
struct StimulusKey {
  std::string item_id;
  SubjectForm subject_form = SubjectForm::Pronoun;
  Number number = Number::Singular;

  friend auto operator<=>(const StimulusKey&, const StimulusKey&) = default;
};

// Baselines are keyed by (item_id, subject_form).
using BaselineKey = std::pair<std::string, SubjectForm>;

// Mean raw rating of each item's control sentence, per subject form.
std::map<BaselineKey, double> compute_baselines(std::span<const TrialRecord> trials);

struct DesignRow {
  int response = 4;
  double slor_z = 0.0;
  double order_z = 0.0;
  double baseline_z = 0.0;
  double fmax_z = 0.0;
  double fmean_z = 0.0;
  std::string participant_id;
};

struct DesignInputs {
  std::span<const TrialRecord> trials;
  const std::map<StimulusKey, LinkValues>* links = nullptr;
  const std::map<StimulusKey, double>* slor = nullptr;
  const std::map<BaselineKey, double>* baselines = nullptr;
};

/// One row per illusory trial; every predictor standardized over the
/// assembled rows. Throws InputError listing unmatched joins with counts.
std::vector<DesignRow> build_design(const DesignInputs& inputs);

// Column order: response,slor_z,order_z,baseline_z,fmax_z,fmean_z,participant_id
void write_design(std::ostream& out, std::span<const DesignRow> rows);
std::vector<DesignRow> parse_design(const csv::Table& table);
std::vector<DesignRow> read_design(const std::string& path);

}  // namespace ncci
