#include "ncci/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string_view>
#include <unordered_set>

#include <json.hpp>

#include "ncci/error.hpp"
#include "ncci/kernels.hpp"

namespace ncci {

namespace {

using Tokens = std::vector<std::string>;

const std::unordered_set<std::string_view> kAuxiliaries = {
    "have", "has",   "had",    "did",   "do",   "does",  "is",     "are",  "was", "were",
    "am",   "will",  "would",  "can",   "could", "shall", "should", "may", "might", "must"};

const std::unordered_set<std::string_view> kDeterminers = {"the", "a",    "an",   "this",
                                                           "that", "these", "those"};

const std::unordered_set<std::string_view> kComparativeMarkers = {"more", "less", "fewer"};

const std::unordered_set<std::string_view> kComparisonWords = {
    "less", "fewer", "compare", "compared", "comparing", "comparison", "unlike"};

const std::unordered_set<std::string_view> kConnectives = {"whereas", "while",   "whilst",
                                                           "although", "though", "however"};

const std::map<std::string_view, std::string_view> kAccusative = {
    {"i", "me"}, {"we", "us"}, {"he", "him"}, {"she", "her"}, {"they", "them"}};

const std::map<std::string_view, std::string_view> kIrregularPlural = {
    {"man", "men"}, {"woman", "women"}, {"person", "people"}, {"child", "children"}};

// -er words that precede "than" without being comparative adjectives.
const std::unordered_set<std::string_view> kNotComparative = {"other", "rather", "whether",
                                                              "either", "neither"};

bool is_aux(const std::string& t) { return kAuxiliaries.count(t) != 0; }

std::size_t count(const Tokens& xs, std::string_view w) {
  return static_cast<std::size_t>(std::count(xs.begin(), xs.end(), w));
}

bool contains(const Tokens& xs, std::string_view w) { return count(xs, w) > 0; }

std::optional<std::size_t> find_from(const Tokens& xs, std::string_view w, std::size_t from = 0) {
  for (std::size_t i = from; i < xs.size(); ++i) {
    if (xs[i] == w) return i;
  }
  return std::nullopt;
}

bool initial_more(const Tokens& xs) { return !xs.empty() && xs.front() == "more"; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool comparative_adjective(const std::string& w) {
  return w.size() > 3 && ends_with(w, "er") && kNotComparative.count(w) == 0;
}

std::size_t bigram_count(const Tokens& xs, std::string_view a, std::string_view b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (xs[i] == a && xs[i + 1] == b) ++n;
  }
  return n;
}

bool is_negation(const std::string& t, const std::vector<std::string>& lexicon) {
  for (const auto& w : lexicon) {
    if (w == "n't") {
      if (t.size() > 3 && ends_with(t, "n't")) return true;
    } else if (t == w) {
      return true;
    }
  }
  return false;
}

std::size_t negation_count(const Tokens& xs, const std::vector<std::string>& lexicon) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (is_negation(xs[i], lexicon)) {
      ++n;
    } else if (xs[i] == "but") {
      const bool left = i > 0 && is_negation(xs[i - 1], lexicon);
      const bool right = i + 1 < xs.size() && is_negation(xs[i + 1], lexicon);
      if (left || right) ++n;
    }
  }
  return n;
}

// Than-clause subject of the perceived sentence: tokens after "than" minus a
// trailing auxiliary.
struct ThanClause {
  std::size_t than = 0;
  std::size_t subject_begin = 0;
  std::size_t subject_end = 0;
};

std::optional<ThanClause> than_clause(const Tokens& xs) {
  auto t = find_from(xs, "than");
  if (!t) return std::nullopt;
  ThanClause c{*t, *t + 1, xs.size()};
  while (c.subject_end > c.subject_begin && is_aux(xs[c.subject_end - 1])) --c.subject_end;
  return c;
}

std::vector<std::string> plural_forms(const std::string& w) {
  std::vector<std::string> out;
  if (auto it = kIrregularPlural.find(w); it != kIrregularPlural.end()) {
    out.emplace_back(it->second);
  }
  out.push_back(w + "s");
  out.push_back(w + "es");
  if (w.size() > 1 && w.back() == 'y') out.push_back(w.substr(0, w.size() - 1) + "ies");
  return out;
}

bool has_comparison_marker(const Tokens& xs) {
  return std::any_of(xs.begin(), xs.end(),
                     [](const std::string& t) { return kComparativeMarkers.count(t) != 0; });
}

// Whether the corrected sentence still states a comparison.
bool comparison_complete(const Tokens& c, const FeatureSet& features) {
  const bool transformed = features.count(EditFeature::ComparativeTransformed) != 0;
  if (!has_comparison_marker(c) && !transformed) return false;
  if (auto tc = find_from(c, "than")) {
    for (std::size_t i = 0; i < *tc; ++i) {
      if (kComparativeMarkers.count(c[i])) return true;
    }
    return *tc > 0 && comparative_adjective(c[*tc - 1]);
  }
  if (features.count(EditFeature::NegationInserted) || transformed) return true;
  // elliptical adverbial comparative: "... use TikTok more (often)"
  for (std::size_t i = c.size() >= 2 ? c.size() - 2 : 0; i < c.size(); ++i) {
    if (kComparativeMarkers.count(c[i])) return true;
  }
  return false;
}

bool multi_clause(const Tokens& p, const Tokens& c) {
  std::size_t before = 0;
  std::size_t after = 0;
  for (const auto& t : p) before += kConnectives.count(t);
  for (const auto& t : c) after += kConnectives.count(t);
  return after > before;
}

}  // namespace

std::string to_string(EditFeature f) {
  switch (f) {
    case EditFeature::MoreShifted: return "more_shifted";
    case EditFeature::MoreThanFormed: return "more_than_formed";
    case EditFeature::ComparativeTransformed: return "comparative_transformed";
    case EditFeature::ThanClauseDropped: return "than_clause_dropped";
    case EditFeature::ThanClauseFronted: return "than_clause_fronted";
    case EditFeature::DeterminerDropped: return "determiner_dropped";
    case EditFeature::SubjectPluralized: return "subject_pluralized";
    case EditFeature::PronounCaseChanged: return "pronoun_case_changed";
    case EditFeature::NegationInserted: return "negation_inserted";
    case EditFeature::SecondMoreInserted: return "second_more_inserted";
    case EditFeature::NoEdit: return "no_edit";
  }
  return "unknown";
}

EditFeature parse_edit_feature(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(EditFeature::NoEdit); ++i) {
    const auto f = static_cast<EditFeature>(i);
    if (to_string(f) == s) return f;
  }
  throw InputError("unknown edit feature '" + s + "'");
}

std::string to_string(Category c) {
  switch (c) {
    case Category::EventComparison: return "event_comparison";
    case Category::IndividualComparison: return "individual_comparison";
    case Category::EventNegation: return "event_negation";
    case Category::DoubleComparison: return "double_comparison";
    case Category::NoChange: return "no_change";
    case Category::IncompleteComparison: return "incomplete_comparison";
    case Category::Blended: return "blended";
    case Category::Outlier: return "outlier";
    case Category::Ungrammatical: return "ungrammatical";
  }
  return "unknown";
}

Category parse_category(const std::string& s) {
  for (Category c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  throw InputError("unknown interpretation category '" + s + "'");
}

bool is_plausible(Category c) {
  switch (c) {
    case Category::EventComparison:
    case Category::IndividualComparison:
    case Category::EventNegation:
    case Category::DoubleComparison:
      return true;
    default:
      return false;
  }
}

FeatureSet detect_features(const TokenSequence& perceived, const TokenSequence& corrected,
                           const ClassifierOptions& options) {
  const Tokens& p = perceived.tokens();
  const Tokens& c = corrected.tokens();
  if (p == c) return {EditFeature::NoEdit};

  FeatureSet out;
  const std::size_t more_p = count(p, "more");
  const std::size_t more_c = count(c, "more");

  if (initial_more(p) && !initial_more(c) && more_c > 0) out.insert(EditFeature::MoreShifted);
  if (initial_more(c) && more_c > more_p) out.insert(EditFeature::SecondMoreInserted);

  for (std::string_view m : {"more", "less", "fewer"}) {
    if (bigram_count(c, m, "than") > bigram_count(p, m, "than")) {
      out.insert(EditFeature::MoreThanFormed);
    }
  }

  bool transformed = false;
  for (const auto& w : kComparisonWords) {
    if (count(c, w) > count(p, w)) transformed = true;
  }
  for (std::string_view q : {"much", "many", "often"}) {
    if (bigram_count(c, "as", q) > bigram_count(p, "as", q)) transformed = true;
  }
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] == "than" && comparative_adjective(c[i - 1]) && !contains(p, c[i - 1])) {
      transformed = true;
    }
  }
  if (transformed) out.insert(EditFeature::ComparativeTransformed);

  const auto pc = than_clause(p);
  const auto tc = find_from(c, "than");
  if (pc && !tc) out.insert(EditFeature::ThanClauseDropped);

  if (pc && tc && pc->than > 0) {
    // The predicate that preceded "than" now follows it, and the fronted
    // clause is followed by a single predicate ("than judges have vacationed").
    const std::string& anchor = p[pc->than - 1];
    const bool moved = find_from(c, anchor, *tc + 1).has_value();
    std::optional<std::size_t> aux;
    for (std::size_t j = *tc + 1; j < c.size(); ++j) {
      if (is_aux(c[j])) {
        aux = j;
        break;
      }
    }
    if (moved && aux && (*aux + 1 >= c.size() || !is_aux(c[*aux + 1]))) {
      out.insert(EditFeature::ThanClauseFronted);
    }
  }

  if (pc && tc && pc->subject_begin < p.size() && kDeterminers.count(p[pc->subject_begin]) &&
      (*tc + 1 >= c.size() || c[*tc + 1] != p[pc->subject_begin])) {
    out.insert(EditFeature::DeterminerDropped);
  }

  if (pc && pc->subject_end > pc->subject_begin) {
    const std::string& head = p[pc->subject_end - 1];
    const std::size_t from = tc ? *tc + 1 : 0;
    if (kAccusative.count(head) == 0) {
      for (const auto& form : plural_forms(head)) {
        if (!contains(p, form) && find_from(c, form, from)) {
          out.insert(EditFeature::SubjectPluralized);
          break;
        }
      }
    }
    if (tc) {
      for (std::size_t i = pc->subject_begin; i < pc->subject_end; ++i) {
        auto it = kAccusative.find(p[i]);
        if (it == kAccusative.end()) continue;
        const std::string acc(it->second);
        if (find_from(c, acc, *tc + 1) && !find_from(p, acc, pc->than + 1)) {
          out.insert(EditFeature::PronounCaseChanged);
        }
      }
    }
  }

  if (negation_count(c, options.negation_lexicon) > negation_count(p, options.negation_lexicon)) {
    out.insert(EditFeature::NegationInserted);
  }
  return out;
}

InterpretationLabel assign_label(const FeatureSet& features, const CorrectionRecord& record,
                                 bool outlier) {
  auto has = [&](EditFeature f) { return features.count(f) != 0; };
  if (has(EditFeature::NoEdit)) return InterpretationLabel::of(Category::NoChange);
  if (outlier) return InterpretationLabel::of(Category::Outlier);

  const TokenSequence corrected = tokenize(record.corrected);
  const TokenSequence perceived = tokenize(record.perceived);
  const Tokens& c = corrected.tokens();

  if (!comparison_complete(c, features)) {
    return InterpretationLabel::of(Category::IncompleteComparison);
  }
  if (has(EditFeature::NegationInserted)) return InterpretationLabel::of(Category::EventNegation);
  if (has(EditFeature::SecondMoreInserted) && initial_more(c)) {
    return InterpretationLabel::of(Category::DoubleComparison);
  }
  const bool event = has(EditFeature::MoreShifted) || has(EditFeature::MoreThanFormed) ||
                     has(EditFeature::ComparativeTransformed);
  const bool individual =
      initial_more(c) && (has(EditFeature::ThanClauseFronted) ||
                          has(EditFeature::DeterminerDropped) ||
                          has(EditFeature::SubjectPluralized) ||
                          has(EditFeature::PronounCaseChanged));
  if (event && individual && multi_clause(perceived.tokens(), c)) {
    return InterpretationLabel::of(Category::Blended);
  }
  if (event) return InterpretationLabel::of(Category::EventComparison);
  if (individual) return InterpretationLabel::of(Category::IndividualComparison);
  return InterpretationLabel::of(Category::Ungrammatical);
}

std::set<std::size_t> flag_outliers(std::span<const DistanceRecord> records, double outlier_sd) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[records[i].item_id].push_back(i);

  std::set<std::size_t> flagged;
  for (const auto& [item, idx] : groups) {
    if (idx.size() < 2) continue;
    double mean = 0.0;
    for (auto i : idx) mean += static_cast<double>(records[i].distance.value);
    mean /= static_cast<double>(idx.size());
    double ss = 0.0;
    for (auto i : idx) {
      const double dev = static_cast<double>(records[i].distance.value) - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(idx.size() - 1));
    for (auto i : idx) {
      if (std::abs(static_cast<double>(records[i].distance.value) - mean) > outlier_sd * sd) {
        flagged.insert(i);
      }
    }
  }
  return flagged;
}

double CategorySummary::percent(Category c) const {
  if (total == 0) return 0.0;
  auto it = counts.find(c);
  const std::size_t n = it == counts.end() ? 0 : it->second;
  return 100.0 * static_cast<double>(n) / static_cast<double>(total);
}

double CategorySummary::plausible_percent() const {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(plausible) / static_cast<double>(total);
}

double CategorySummary::implausible_percent() const {
  return total == 0 ? 0.0 : 100.0 - plausible_percent();
}

ClassifiedCorpus classify_corpus(std::span<const CorrectionRecord> records,
                                 const ClassifierOptions& options) {
  ClassifiedCorpus out;
  const std::size_t n = records.size();
  if (n == 0) return out;

  std::vector<TokenSequence> perceived(n), corrected(n);
  for (std::size_t i = 0; i < n; ++i) {
    perceived[i] = tokenize(records[i].perceived);
    corrected[i] = tokenize(records[i].corrected);
    if (perceived[i].empty() || corrected[i].empty()) {
      throw InputError("correction record " + std::to_string(i + 1) +
                       " has an empty perceived or corrected sentence");
    }
  }
  const auto distances = kernels::parallel::batch_dld(perceived, corrected, options.dld);

  std::vector<DistanceRecord> by_item;
  by_item.reserve(n);
  for (std::size_t i = 0; i < n; ++i) by_item.push_back({records[i].item_id, {distances[i]}});
  const auto outliers = flag_outliers(by_item, options.outlier_sd);

  out.rows.resize(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    const auto i = static_cast<std::size_t>(k);
    LabeledCorrection& row = out.rows[i];
    row.record = records[i];
    row.distance = {distances[i]};
    row.outlier = outliers.count(i) != 0;
    row.features = detect_features(perceived[i], corrected[i], options);
    row.label = assign_label(row.features, row.record, row.outlier);
  }

  for (const auto& row : out.rows) {
    for (CategorySummary* s :
         {&out.summary.overall,
          &out.summary.by_condition[condition_name(row.record.subject_form, row.record.number)]}) {
      ++s->total;
      ++s->counts[row.label.category];
      if (row.label.plausible) ++s->plausible;
    }
  }
  return out;
}

std::vector<CorrectionRecord> parse_corrections(const csv::Table& table) {
  const auto c_pid = table.require_column("participant_id");
  const auto c_item = table.require_column("item_id");
  const auto c_form = table.require_column("subject_form");
  const auto c_num = table.require_column("number");
  const auto c_perc = table.require_column("perceived");
  const auto c_corr = table.require_column("corrected");
  std::vector<CorrectionRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "corrections line " + std::to_string(table.line_numbers[r]);
    try {
      CorrectionRecord rec;
      rec.participant_id = row[c_pid];
      rec.item_id = row[c_item];
      rec.subject_form = parse_subject_form(row[c_form]);
      rec.number = parse_number(row[c_num]);
      if (rec.number == Number::Control) {
        throw InputError("corrections cover illusory conditions only, got 'control'");
      }
      rec.perceived = row[c_perc];
      rec.corrected = row[c_corr];
      if (rec.perceived.empty() || rec.corrected.empty()) {
        throw InputError("perceived and corrected must be non-empty");
      }
      out.push_back(std::move(rec));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<CorrectionRecord> read_corrections(const std::string& path) {
  return parse_corrections(csv::read_file(path));
}

void write_labeled(std::ostream& out, std::span<const LabeledCorrection> rows) {
  csv::write_row(out, {"participant_id", "item_id", "subject_form", "number", "perceived",
                       "corrected", "dld", "outlier", "features", "category", "plausible"});
  for (const auto& row : rows) {
    std::string features;
    for (auto f : row.features) {
      if (!features.empty()) features.push_back('|');
      features += to_string(f);
    }
    csv::write_row(out, {row.record.participant_id, row.record.item_id,
                         to_string(row.record.subject_form), to_string(row.record.number),
                         row.record.perceived, row.record.corrected,
                         std::to_string(row.distance.value), row.outlier ? "true" : "false",
                         features, to_string(row.label.category),
                         row.label.plausible ? "true" : "false"});
  }
}

std::vector<LabeledCorrection> parse_labeled(const csv::Table& table) {
  auto records = parse_corrections(table);
  const auto c_dld = table.require_column("dld");
  const auto c_out = table.require_column("outlier");
  const auto c_feat = table.require_column("features");
  const auto c_cat = table.require_column("category");
  const auto c_pl = table.require_column("plausible");
  std::vector<LabeledCorrection> out;
  out.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "labeled line " + std::to_string(table.line_numbers[r]);
    LabeledCorrection lc;
    lc.record = std::move(records[r]);
    try {
      lc.distance = {static_cast<std::size_t>(std::stoull(row[c_dld]))};
    } catch (const std::exception&) {
      throw InputError(where + ": bad dld value '" + row[c_dld] + "'");
    }
    lc.outlier = row[c_out] == "true";
    try {
      std::size_t start = 0;
      while (start < row[c_feat].size()) {
        const auto bar = std::min(row[c_feat].find('|', start), row[c_feat].size());
        lc.features.insert(parse_edit_feature(row[c_feat].substr(start, bar - start)));
        start = bar + 1;
      }
      lc.label.category = parse_category(row[c_cat]);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    lc.label.plausible = row[c_pl] == "true";
    if (lc.label.plausible != is_plausible(lc.label.category)) {
      throw InputError(where + ": plausible flag contradicts category " + row[c_cat]);
    }
    out.push_back(std::move(lc));
  }
  return out;
}

namespace {

nlohmann::ordered_json summary_object(const CategorySummary& s) {
  nlohmann::ordered_json j;
  j["total"] = s.total;
  j["plausible_percent"] = s.plausible_percent();
  j["implausible_percent"] = s.implausible_percent();
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (Category c : kAllCategories) {
    auto it = s.counts.find(c);
    cats[to_string(c)] = {{"count", it == s.counts.end() ? 0 : it->second},
                          {"percent", s.percent(c)},
                          {"plausible", is_plausible(c)}};
  }
  j["categories"] = cats;
  return j;
}

}  // namespace

std::string summary_json(const CorpusSummary& summary, int indent) {
  nlohmann::ordered_json j;
  j["overall"] = summary_object(summary.overall);
  nlohmann::ordered_json by = nlohmann::ordered_json::object();
  for (const auto& [cond, s] : summary.by_condition) by[cond] = summary_object(s);
  j["by_condition"] = by;
  return j.dump(indent);
}

}  // namespace ncci
