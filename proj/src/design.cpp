#include "ncci/design.hpp"

#include <ostream>

#include "ncci/error.hpp"

namespace ncci {

std::map<BaselineKey, double> compute_baselines(std::span<const TrialRecord> trials) {
  std::map<BaselineKey, std::vector<double>> ratings;
  for (const auto& t : trials) {
    if (t.number == Number::Control) {
      ratings[{t.item_id, t.subject_form}].push_back(static_cast<double>(t.rating));
    }
  }
  std::map<BaselineKey, double> out;
  for (const auto& [key, rs] : ratings) out[key] = mean(rs);
  return out;
}

std::vector<DesignRow> build_design(const DesignInputs& inputs) {
  if (!inputs.links || !inputs.slor || !inputs.baselines) {
    throw InputError("build_design: links, SLOR and baselines are all required");
  }
  std::vector<double> slor, order, baseline, fmax, fmean;
  std::vector<DesignRow> rows;
  std::size_t missing_links = 0, missing_slor = 0, missing_baseline = 0;
  std::string first_links, first_slor, first_baseline;

  for (const auto& t : inputs.trials) {
    if (t.number == Number::Control) continue;
    const StimulusKey key{t.item_id, t.subject_form, t.number};
    const std::string label = t.item_id + " (" + condition_name(t.subject_form, t.number) + ")";
    auto l = inputs.links->find(key);
    auto s = inputs.slor->find(key);
    auto b = inputs.baselines->find({t.item_id, t.subject_form});
    bool ok = true;
    if (l == inputs.links->end()) {
      if (missing_links++ == 0) first_links = label;
      ok = false;
    }
    if (s == inputs.slor->end()) {
      if (missing_slor++ == 0) first_slor = label;
      ok = false;
    }
    if (b == inputs.baselines->end()) {
      if (missing_baseline++ == 0) first_baseline = "item " + t.item_id + " (" + to_string(t.subject_form) + ")";
      ok = false;
    }
    if (!ok) continue;
    DesignRow row;
    row.response = t.rating;
    row.participant_id = t.participant_id;
    rows.push_back(std::move(row));
    slor.push_back(s->second);
    order.push_back(static_cast<double>(t.trial_order));
    baseline.push_back(b->second);
    fmax.push_back(l->second.f_max);
    fmean.push_back(l->second.f_mean);
  }

  if (missing_links || missing_slor || missing_baseline) {
    std::string msg = "build_design: unmatched join keys:";
    if (missing_links) {
      msg += " " + std::to_string(missing_links) + " trials lack link values (first: " +
             first_links + ");";
    }
    if (missing_slor) {
      msg += " " + std::to_string(missing_slor) + " trials lack SLOR (first: " + first_slor + ");";
    }
    if (missing_baseline) {
      msg += " " + std::to_string(missing_baseline) + " trials lack a baseline (first: " +
             first_baseline + ");";
    }
    throw InputError(msg);
  }
  if (rows.size() < 2) throw InputError("build_design: fewer than two illusory trials");

  const auto zs = standardize(slor, "slor");
  const auto zo = standardize(order, "order");
  const auto zb = standardize(baseline, "baseline");
  const auto zmax = standardize(fmax, "f_max");
  const auto zmean = standardize(fmean, "f_mean");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].slor_z = zs[i];
    rows[i].order_z = zo[i];
    rows[i].baseline_z = zb[i];
    rows[i].fmax_z = zmax[i];
    rows[i].fmean_z = zmean[i];
  }
  return rows;
}

void write_design(std::ostream& out, std::span<const DesignRow> rows) {
  csv::write_row(out, {"response", "slor_z", "order_z", "baseline_z", "fmax_z", "fmean_z",
                       "participant_id"});
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.response), csv::format_double(r.slor_z),
                         csv::format_double(r.order_z), csv::format_double(r.baseline_z),
                         csv::format_double(r.fmax_z), csv::format_double(r.fmean_z),
                         r.participant_id});
  }
}

std::vector<DesignRow> parse_design(const csv::Table& table) {
  const auto c_resp = table.require_column("response");
  const auto c_slor = table.require_column("slor_z");
  const auto c_order = table.require_column("order_z");
  const auto c_base = table.require_column("baseline_z");
  const auto c_max = table.require_column("fmax_z");
  const auto c_mean = table.require_column("fmean_z");
  const auto c_pid = table.require_column("participant_id");
  std::vector<DesignRow> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      DesignRow d;
      d.response = std::stoi(row[c_resp]);
      d.slor_z = std::stod(row[c_slor]);
      d.order_z = std::stod(row[c_order]);
      d.baseline_z = std::stod(row[c_base]);
      d.fmax_z = std::stod(row[c_max]);
      d.fmean_z = std::stod(row[c_mean]);
      d.participant_id = row[c_pid];
      out.push_back(std::move(d));
    } catch (const std::exception&) {
      throw InputError("design line " + std::to_string(table.line_numbers[r]) +
                       ": non-numeric value");
    }
  }
  return out;
}

std::vector<DesignRow> read_design(const std::string& path) {
  return parse_design(csv::read_file(path));
}

}  // namespace ncci
