#include "ncci/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "ncci/error.hpp"
#include "ncci/lm_scoring.hpp"

namespace ncci {

namespace {

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InputError(what + " '" + s + "' is not an integer");
  return v;
}

}  // namespace

std::vector<TrialRecord> parse_trials(const csv::Table& table) {
  const auto c_pid = table.require_column("participant_id");
  const auto c_item = table.require_column("item_id");
  const auto c_form = table.require_column("subject_form");
  const auto c_num = table.require_column("number");
  const auto c_rating = table.require_column("rating");
  const auto c_order = table.require_column("trial_order");
  std::vector<TrialRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      TrialRecord t;
      t.participant_id = row[c_pid];
      t.item_id = row[c_item];
      t.subject_form = parse_subject_form(row[c_form]);
      t.number = parse_number(row[c_num]);
      t.rating = parse_int(row[c_rating], "rating");
      t.trial_order = parse_int(row[c_order], "trial_order");
      if (t.rating < 1 || t.rating > 7) throw InputError("rating must be in 1..7");
      if (t.trial_order < 1 || t.trial_order > 94) throw InputError("trial_order must be in 1..94");
      out.push_back(std::move(t));
    } catch (const InputError& e) {
      throw InputError("trials line " + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TrialRecord> read_trials(const std::string& path) {
  return parse_trials(csv::read_file(path));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InputError("mean of an empty sample");
  return compensated_sum(xs) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) throw InputError("standard deviation needs at least two values");
  const double m = mean(xs);
  std::vector<double> sq;
  sq.reserve(xs.size());
  for (double x : xs) sq.push_back((x - m) * (x - m));
  return std::sqrt(compensated_sum(sq) / static_cast<double>(xs.size() - 1));
}

std::vector<double> standardize(std::span<const double> xs, const std::string& name) {
  const double m = mean(xs);
  const double sd = sample_sd(xs);
  if (!(sd > 0.0)) throw InputError("cannot standardize constant " + name);
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((x - m) / sd);
  return out;
}

ZScoreResult zscore_by_participant(std::span<const TrialRecord> trials) {
  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    by_participant[trials[i].participant_id].push_back(i);
  }
  std::vector<double> z(trials.size(), 0.0);
  std::vector<bool> keep(trials.size(), false);
  ZScoreResult result;
  for (const auto& [pid, idx] : by_participant) {
    std::vector<double> ratings;
    for (auto i : idx) ratings.push_back(static_cast<double>(trials[i].rating));
    const bool constant = std::all_of(ratings.begin(), ratings.end(),
                                      [&](double r) { return r == ratings.front(); });
    if (idx.size() < 2 || constant) {
      result.excluded_participants.push_back(pid);
      continue;
    }
    const double m = mean(ratings);
    const double sd = sample_sd(ratings);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      z[idx[k]] = (ratings[k] - m) / sd;
      keep[idx[k]] = true;
    }
  }
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (keep[i]) result.trials.push_back({trials[i], z[i]});
  }
  return result;
}

std::vector<AcceptabilityDifference> acceptability_differences(
    std::span<const TrialRecord> trials) {
  const auto scored = zscore_by_participant(trials);
  using Cell = std::tuple<std::string, SubjectForm, Number>;
  std::map<Cell, std::vector<double>> cells;
  std::map<std::string, bool> items;
  for (const auto& t : scored.trials) {
    cells[{t.trial.item_id, t.trial.subject_form, t.trial.number}].push_back(t.z_rating);
    items[t.trial.item_id] = true;
  }
  auto cell_mean = [&](const std::string& item, SubjectForm f, Number n) {
    auto it = cells.find({item, f, n});
    if (it == cells.end() || it->second.empty()) {
      throw InputError("no ratings for item " + item + " in condition " + condition_name(f, n));
    }
    return mean(it->second);
  };

  std::vector<AcceptabilityDifference> out;
  for (const auto& [item, _] : items) {
    for (SubjectForm f : {SubjectForm::Pronoun, SubjectForm::NounPhrase}) {
      const double control = cell_mean(item, f, Number::Control);
      for (Number n : {Number::Singular, Number::Plural}) {
        out.push_back({item, f, n, cell_mean(item, f, n) - control});
      }
    }
  }
  return out;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InputError("pearson: vectors differ in length (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw InputError("pearson: need at least three pairs");
  const double mx = mean(x);
  const double my = mean(y);
  std::vector<double> sxy, sxx, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy.push_back(dx * dy);
    sxx.push_back(dx * dx);
    syy.push_back(dy * dy);
  }
  const double vx = compensated_sum(sxx);
  const double vy = compensated_sum(syy);
  if (!(vx > 0.0) || !(vy > 0.0)) throw InputError("pearson: zero variance");

  Correlation c;
  c.n = x.size();
  c.r = std::clamp(compensated_sum(sxy) / std::sqrt(vx * vy), -1.0, 1.0);
  const double df = static_cast<double>(c.n - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    boost::math::students_t dist(df);
    c.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return c;
}

}  // namespace ncci
