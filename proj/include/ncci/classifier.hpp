#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ncci/conditions.hpp"
#include "ncci/csv.hpp"
#include "ncci/text_edit.hpp"

namespace ncci {

// One trial of the correction task.
struct CorrectionRecord {
  std::string participant_id;
  std::string item_id;
  SubjectForm subject_form = SubjectForm::Pronoun;
  Number number = Number::Singular;  // never Control
  std::string perceived;
  std::string corrected;
};

enum class EditFeature {
  MoreShifted,
  MoreThanFormed,
  ComparativeTransformed,
  ThanClauseDropped,
  ThanClauseFronted,
  DeterminerDropped,
  SubjectPluralized,
  PronounCaseChanged,
  NegationInserted,
  SecondMoreInserted,
  NoEdit,
};

enum class Category {
  EventComparison,
  IndividualComparison,
  EventNegation,
  DoubleComparison,
  NoChange,
  IncompleteComparison,
  Blended,
  Outlier,
  Ungrammatical,
};

inline constexpr Category kAllCategories[] = {
    Category::EventComparison, Category::IndividualComparison, Category::EventNegation,
    Category::DoubleComparison, Category::NoChange,           Category::IncompleteComparison,
    Category::Blended,         Category::Outlier,            Category::Ungrammatical,
};

std::string to_string(EditFeature f);
std::string to_string(Category c);
Category parse_category(const std::string& s);
EditFeature parse_edit_feature(const std::string& s);

// Only the four comparison/negation readings are plausible.
bool is_plausible(Category c);

struct InterpretationLabel {
  Category category = Category::Ungrammatical;
  bool plausible = false;

  static InterpretationLabel of(Category c) { return {c, is_plausible(c)}; }
  friend bool operator==(const InterpretationLabel&, const InterpretationLabel&) = default;
};

struct ClassifierOptions {
  // "n't" matches any token ending in it. "but" is handled separately: it
  // counts only next to a negation word.
  std::vector<std::string> negation_lexicon = {"not", "n't", "never", "no",
                                               "none", "neither", "nor"};
  DldOptions dld;
  // Outlier rule threshold in sample standard deviations.
  double outlier_sd = 3.0;
};

using FeatureSet = std::set<EditFeature>;

FeatureSet detect_features(const TokenSequence& perceived, const TokenSequence& corrected,
                           const ClassifierOptions& options = {});

/// Precedence: NoEdit, outlier, missing comparative, negation, second more,
/// blended, event comparison, individual comparison, ungrammatical.
InterpretationLabel assign_label(const FeatureSet& features, const CorrectionRecord& record,
                                 bool outlier);

struct DistanceRecord {
  std::string item_id;
  EditDistance distance;
};

// Indices of records whose distance deviates from their item's mean by more
// than outlier_sd sample standard deviations.
std::set<std::size_t> flag_outliers(std::span<const DistanceRecord> records,
                                    double outlier_sd = 3.0);

struct LabeledCorrection {
  CorrectionRecord record;
  EditDistance distance;
  FeatureSet features;
  bool outlier = false;
  InterpretationLabel label;
};

struct CategorySummary {
  std::size_t total = 0;
  std::map<Category, std::size_t> counts;
  std::size_t plausible = 0;

  double percent(Category c) const;
  double plausible_percent() const;
  double implausible_percent() const;
};

struct CorpusSummary {
  CategorySummary overall;
  std::map<std::string, CategorySummary> by_condition;
};

struct ClassifiedCorpus {
  std::vector<LabeledCorrection> rows;
  CorpusSummary summary;
};

ClassifiedCorpus classify_corpus(std::span<const CorrectionRecord> records,
                                 const ClassifierOptions& options = {});

// Corrections CSV: participant_id,item_id,subject_form,number,perceived,corrected
std::vector<CorrectionRecord> parse_corrections(const csv::Table& table);
std::vector<CorrectionRecord> read_corrections(const std::string& path);

// labeled.csv columns: the corrections columns followed by
// dld,outlier,features,category,plausible
void write_labeled(std::ostream& out, std::span<const LabeledCorrection> rows);
std::vector<LabeledCorrection> parse_labeled(const csv::Table& table);

std::string summary_json(const CorpusSummary& summary, int indent = 2);

}  // namespace ncci
