#include "ncci/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ncci/error.hpp"
#include "ncci/providers.hpp"

namespace ncci {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kHashTag = "config_sha256=";

StimulusKey key_of(const CorrectionRecord& r) { return {r.item_id, r.subject_form, r.number}; }

std::string field(const csv::Table& t, std::size_t row, std::size_t col) { return t.rows[row][col]; }

std::string where(const csv::Table& t, std::size_t row) {
  return "line " + std::to_string(t.line_numbers[row]);
}

double parse_real(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError(context + ": '" + s + "' is not a number");
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open file", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string require_path(const std::string& value, const std::string& key) {
  if (value.empty()) throw ConfigError(key + " is required for this stage");
  return value;
}

void check_upstream(const csv::Table& table, const std::string& name, const std::string& hash,
                    RunReport& report) {
  auto h = provenance_hash(table);
  if (!h) {
    report.warnings.push_back(name + " carries no config hash");
  } else if (*h != hash) {
    report.warnings.push_back(name + " was produced under config " + *h +
                              ", current config is " + hash);
  }
}

std::unique_ptr<SentenceScorer> make_source_provider(const RunConfig& config) {
  if (config.scorer.provider == "http") {
    HttpProviderOptions o;
    o.url = config.scorer.url;
    o.model = config.scorer.model;
    o.max_inflight = config.scorer.max_inflight;
    o.batch_size = config.scorer.batch_size;
    o.timeout_seconds = config.scorer.timeout_seconds;
    return std::make_unique<HttpScoreProvider>(std::move(o));
  }
  return std::make_unique<FileScoreProvider>(
      require_path(config.scorer.scores_path, "scorer.scores_path"), config.scorer.model);
}

std::vector<Stimulus> load_stimuli(const RunConfig& config,
                                   std::span<const CorrectionRecord> corrections) {
  if (!config.io.stimuli.empty()) return read_stimuli(config.io.stimuli);
  return stimuli_from_corrections(corrections);
}

ojson fit_json(const OrdinalFit& fit) {
  ojson coefs = ojson::object();
  for (const auto& [name, value] : fit.coefficients) coefs[name] = value;
  return {{"model", fit.name()},
          {"converged", fit.converged},
          {"separation", fit.separation},
          {"log_likelihood", fit.log_likelihood},
          {"aic", aic(fit.log_likelihood, fit.n_parameters())},
          {"n_obs", fit.n_obs},
          {"n_parameters", fit.n_parameters()},
          {"iterations", fit.iterations},
          {"gradient_norm", fit.gradient_norm},
          {"thresholds", fit.thresholds},
          {"coefficients", coefs},
          {"diagnostics", fit.diagnostics}};
}

// ---------------------------------------------------------------------------
// Stages

void stage_score(const RunConfig& config, const fs::path& out_dir, const std::string& hash,
                 RunReport& report) {
  auto corrections = read_corrections(require_path(config.io.corrections, "io.corrections"));
  auto stimuli = load_stimuli(config, corrections);

  std::vector<std::string> texts;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& t) {
    if (seen.insert(t).second) texts.push_back(t);
  };
  for (const auto& s : stimuli) add(s.text);
  for (const auto& c : corrections) add(c.corrected);

  auto provider = make_source_provider(config);
  auto scores = score_sentences(texts, *provider);
  write_score_file((out_dir / "scores.jsonl").string(), scores);

  ojson meta = {{"config_sha256", hash},
                {"model", scores.empty() ? std::string() : scores.front().model_id},
                {"sentences", scores.size()},
                {"logprob_base", "e"}};
  write_file(out_dir / "scores.jsonl.meta.json", meta.dump(2) + "\n");
  report.artifacts.push_back("scores.jsonl");
  report.artifacts.push_back("scores.jsonl.meta.json");
}

void stage_classify(const RunConfig& config, const fs::path& out_dir, const std::string& hash,
                    RunReport& report) {
  auto corrections = read_corrections(require_path(config.io.corrections, "io.corrections"));
  auto corpus = classify_corpus(corrections, config.classifier);

  std::ostringstream labeled;
  labeled << provenance_comment(config) << "\n";
  write_labeled(labeled, corpus.rows);
  write_file(out_dir / "labeled.csv", labeled.str());

  ojson summary = ojson::parse(summary_json(corpus.summary));
  summary["config_sha256"] = hash;
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  report.artifacts.push_back("labeled.csv");
  report.artifacts.push_back("summary.json");
}

// Score file from an earlier stage, with its sidecar hash checked.
std::unique_ptr<FileScoreProvider> upstream_scores(const RunConfig& config, const fs::path& out_dir,
                                                   const std::string& hash, RunReport& report) {
  const fs::path path = out_dir / "scores.jsonl";
  auto provider = std::make_unique<FileScoreProvider>(path.string(), config.scorer.model);
  const fs::path meta_path = out_dir / "scores.jsonl.meta.json";
  if (!fs::exists(meta_path)) {
    report.warnings.push_back("scores.jsonl has no metadata sidecar");
  } else {
    auto meta = ojson::parse(read_text(meta_path), nullptr, false);
    if (meta.is_discarded() || !meta.contains("config_sha256")) {
      report.warnings.push_back("scores.jsonl metadata is unreadable");
    } else if (meta["config_sha256"] != hash) {
      report.warnings.push_back("scores.jsonl was produced under config " +
                                meta["config_sha256"].get<std::string>() +
                                ", current config is " + hash);
    }
  }
  return provider;
}

std::vector<LabeledCorrection> upstream_labeled(const fs::path& out_dir, const std::string& hash,
                                                RunReport& report) {
  auto table = csv::read_file((out_dir / "labeled.csv").string());
  check_upstream(table, "labeled.csv", hash, report);
  return parse_labeled(table);
}

void stage_posterior(const RunConfig& config, const fs::path& out_dir, const std::string& hash,
                     RunReport& report) {
  auto labeled = upstream_labeled(out_dir, hash, report);
  auto provider = upstream_scores(config, out_dir, hash, report);

  std::vector<CorrectionRecord> records;
  records.reserve(labeled.size());
  for (const auto& l : labeled) records.push_back(l.record);
  auto stimuli = load_stimuli(config, records);

  LinkOptions opts{config.noise(), config.plausible_only, config.dedupe};
  auto links = compute_links(stimuli, labeled, *provider, opts);
  for (const auto& s : links.skipped) {
    report.warnings.push_back("no usable correction for item " + s.key.item_id + " " +
                              condition_name(s.key.subject_form, s.key.number) +
                              "; stimulus left out of links.csv");
  }

  std::ostringstream out;
  out << provenance_comment(config) << "\n";
  write_links(out, links.rows, config.link);
  write_file(out_dir / "links.csv", out.str());
  report.artifacts.push_back("links.csv");
}

void stage_analyze(const RunConfig& config, const fs::path& out_dir, const std::string& hash,
                   RunReport& report) {
  auto trials = read_trials(require_path(config.io.trials, "io.trials"));
  auto unigram = UnigramTable::read_tsv(require_path(config.unigram_path, "unigram.path"),
                                        config.unigram_smoothing);

  auto links_table = csv::read_file((out_dir / "links.csv").string());
  check_upstream(links_table, "links.csv", hash, report);
  auto links = parse_links(links_table);
  for (const auto& [key, v] : links) {
    if (std::isnan(v.f_max) || std::isnan(v.f_mean)) {
      throw ConfigError("analysis needs f_max and f_mean; set posterior.link to \"all\"");
    }
  }
  auto labeled = upstream_labeled(out_dir, hash, report);
  auto provider = upstream_scores(config, out_dir, hash, report);

  std::vector<Stimulus> stimuli;
  for (const auto& [key, v] : links) stimuli.push_back({key, v.perceived_text});
  auto slor = slor_by_stimulus(stimuli, *provider, unigram);
  auto baselines = compute_baselines(trials);

  auto design = build_design({trials, &links, &slor, &baselines});
  std::ostringstream design_csv;
  design_csv << provenance_comment(config) << "\n";
  write_design(design_csv, design);
  write_file(out_dir / "design.csv", design_csv.str());
  report.artifacts.push_back("design.csv");

  ojson analysis;
  analysis["config_sha256"] = hash;
  try {
    auto corr = distance_acceptability_correlation(trials, labeled);
    analysis["correlation"] = {{"r", corr.correlation.r},
                               {"p", corr.correlation.p},
                               {"n", corr.correlation.n},
                               {"plausible_trials", corr.plausible_trials}};
  } catch (const InputError& e) {
    report.warnings.push_back(std::string("correlation skipped: ") + e.what());
    analysis["correlation"] = nullptr;
  }

  auto family = fit_model_family(design, config.controls);
  analysis["n_design_rows"] = design.size();
  analysis["fits"] = ojson::array();
  for (const auto& f : family.fits) analysis["fits"].push_back(fit_json(f));
  analysis["ranking"] = ojson::array();
  for (const auto& r : family.ranking) {
    analysis["ranking"].push_back({{"model", r.name},
                                   {"aic", r.aic},
                                   {"delta", r.delta},
                                   {"log_likelihood", r.log_likelihood},
                                   {"n_parameters", r.n_parameters}});
  }
  analysis["criterion"] = "AIC (maximum-likelihood surrogate; not comparable to LOOIC)";
  write_file(out_dir / "analysis.json", analysis.dump(2) + "\n");
  report.artifacts.push_back("analysis.json");

  std::string failed;
  for (const auto& f : family.fits) {
    if (!f.converged) failed += (failed.empty() ? "" : "; ") + f.name() + ": " + f.diagnostics;
  }
  if (!failed.empty()) throw ConvergenceError("ordinal fit did not converge (" + failed + ")");
  for (const auto& f : family.fits) {
    if (f.separation) report.warnings.push_back("possible separation in " + f.name());
  }
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Stimuli

std::vector<Stimulus> parse_stimuli(const csv::Table& table) {
  const auto c_item = table.require_column("item_id");
  const auto c_form = table.require_column("subject_form");
  const auto c_num = table.require_column("number");
  const auto c_text = table.require_column("text");
  std::vector<Stimulus> out;
  std::set<StimulusKey> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    Stimulus s;
    try {
      s.key = {field(table, i, c_item), parse_subject_form(field(table, i, c_form)),
               parse_number(field(table, i, c_num))};
    } catch (const InputError& e) {
      throw InputError(where(table, i) + ": " + e.what());
    }
    if (s.key.number == Number::Control) continue;  // controls have no corrections
    s.text = field(table, i, c_text);
    if (tokenize(s.text).empty()) throw InputError(where(table, i) + ": empty stimulus text");
    if (!seen.insert(s.key).second) {
      throw InputError(where(table, i) + ": duplicate stimulus for item " + s.key.item_id + " " +
                       condition_name(s.key.subject_form, s.key.number));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Stimulus> read_stimuli(const std::string& path) {
  try {
    return parse_stimuli(csv::read_file(path));
  } catch (const MissingInputError&) {
    throw;
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<Stimulus> stimuli_from_corrections(std::span<const CorrectionRecord> records) {
  std::vector<Stimulus> out;
  std::set<StimulusKey> seen;
  for (const auto& r : records) {
    if (seen.insert(key_of(r)).second) out.push_back({key_of(r), r.perceived});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Links

LinksResult compute_links(std::span<const Stimulus> stimuli,
                          std::span<const LabeledCorrection> corrections, SentenceScorer& scorer,
                          const LinkOptions& options) {
  std::map<StimulusKey, std::vector<const LabeledCorrection*>> by_key;
  std::map<StimulusKey, std::set<std::vector<std::string>>> seen_tokens;
  for (const auto& c : corrections) {
    if (options.plausible_only && !c.label.plausible) continue;
    const auto key = key_of(c.record);
    if (options.dedupe && !seen_tokens[key].insert(tokenize(c.record.corrected).tokens()).second) {
      continue;
    }
    by_key[key].push_back(&c);
  }

  std::vector<std::string> texts;
  std::unordered_set<std::string> queued;
  auto add = [&](const std::string& t) {
    if (queued.insert(t).second) texts.push_back(t);
  };
  for (const auto& s : stimuli) {
    auto it = by_key.find(s.key);
    if (it == by_key.end()) continue;
    add(s.text);
    for (const auto* c : it->second) add(c->record.corrected);
  }

  LinksResult out;
  std::unordered_map<std::string, ScoredSentence> scored;
  if (!texts.empty()) {
    auto results = score_sentences(texts, scorer);
    for (std::size_t i = 0; i < texts.size(); ++i) scored.emplace(texts[i], std::move(results[i]));
  }

  for (const auto& s : stimuli) {
    auto it = by_key.find(s.key);
    if (it == by_key.end()) {
      out.skipped.push_back(s);
      continue;
    }
    const ScoredSentence& perceived = scored.at(s.text);
    std::vector<PosteriorEstimate> posts;
    posts.reserve(it->second.size());
    for (const auto* c : it->second) {
      posts.push_back(
          posterior_estimate(scored.at(c->record.corrected), perceived, c->distance, options.noise));
    }
    out.rows.push_back({s, link_values(perceived, posts)});
  }
  return out;
}

void write_links(std::ostream& out, std::span<const StimulusLinks> rows, const std::string& link) {
  const bool all = link == "all";
  if (!all && link != "max" && link != "mean" && link != "weighted") {
    throw ConfigError("link must be max, mean, weighted or all");
  }
  std::vector<std::string> header = {"perceived_text", "item_id", "condition", "n_alternatives"};
  if (all || link == "max") header.push_back("f_max");
  if (all || link == "mean") header.push_back("f_mean");
  if (all || link == "weighted") header.push_back("f_weighted");
  csv::write_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.stimulus.text, r.stimulus.key.item_id,
                                  condition_name(r.stimulus.key.subject_form, r.stimulus.key.number),
                                  std::to_string(r.values.n_alternatives)};
    if (all || link == "max") f.push_back(csv::format_double(r.values.f_max));
    if (all || link == "mean") f.push_back(csv::format_double(r.values.f_mean));
    if (all || link == "weighted") f.push_back(csv::format_double(r.values.f_weighted));
    csv::write_row(out, f);
  }
}

std::map<StimulusKey, LinkValues> parse_links(const csv::Table& table) {
  const auto c_text = table.require_column("perceived_text");
  const auto c_item = table.require_column("item_id");
  const auto c_cond = table.require_column("condition");
  const auto c_n = table.require_column("n_alternatives");
  const auto c_max = table.column("f_max");
  const auto c_mean = table.column("f_mean");
  const auto c_w = table.column("f_weighted");
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::map<StimulusKey, LinkValues> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::string ctx = where(table, i);
    const std::string cond = field(table, i, c_cond);
    const auto sep = cond.find('_');
    if (sep == std::string::npos) throw InputError(ctx + ": malformed condition '" + cond + "'");
    StimulusKey key;
    try {
      key = {field(table, i, c_item), parse_subject_form(cond.substr(0, sep)),
             parse_number(cond.substr(sep + 1))};
    } catch (const InputError& e) {
      throw InputError(ctx + ": " + e.what());
    }
    LinkValues v;
    v.perceived_text = field(table, i, c_text);
    const double n = parse_real(field(table, i, c_n), ctx + " n_alternatives");
    if (n < 1 || n != std::floor(n)) throw InputError(ctx + ": n_alternatives must be a positive integer");
    v.n_alternatives = static_cast<std::size_t>(n);
    v.f_max = c_max ? parse_real(field(table, i, *c_max), ctx + " f_max") : nan;
    v.f_mean = c_mean ? parse_real(field(table, i, *c_mean), ctx + " f_mean") : nan;
    v.f_weighted = c_w ? parse_real(field(table, i, *c_w), ctx + " f_weighted") : nan;
    if (!out.emplace(key, std::move(v)).second) {
      throw InputError(ctx + ": duplicate links row for item " + key.item_id + " " + cond);
    }
  }
  return out;
}

std::map<StimulusKey, double> slor_by_stimulus(std::span<const Stimulus> stimuli,
                                               SentenceScorer& scorer, const UnigramTable& table) {
  std::map<StimulusKey, double> out;
  if (stimuli.empty()) return out;
  std::vector<std::string> texts;
  texts.reserve(stimuli.size());
  for (const auto& s : stimuli) texts.push_back(s.text);
  auto scored = score_sentences(texts, scorer);
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    out[stimuli[i].key] = slor(scored[i], tokenize(stimuli[i].text), table).value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analysis

DistanceCorrelation distance_acceptability_correlation(
    std::span<const TrialRecord> trials, std::span<const LabeledCorrection> corrections) {
  std::map<StimulusKey, std::pair<double, std::size_t>> dist;
  DistanceCorrelation out;
  for (const auto& c : corrections) {
    if (!c.label.plausible) continue;
    auto& [sum, n] = dist[key_of(c.record)];
    sum += static_cast<double>(c.distance.value);
    ++n;
    ++out.plausible_trials;
  }

  std::vector<double> x, y;
  for (const auto& d : acceptability_differences(trials)) {
    auto it = dist.find({d.item_id, d.subject_form, d.number});
    if (it == dist.end()) continue;
    const double m = it->second.first / static_cast<double>(it->second.second);
    out.rows.push_back({it->first, m, d.diff});
    x.push_back(m);
    y.push_back(d.diff);
  }
  out.correlation = pearson(x, y);
  return out;
}

ModelFamily fit_model_family(std::span<const DesignRow> design,
                             std::span<const std::string> controls,
                             const OrdinalOptions& options) {
  std::vector<std::string> base(controls.begin(), controls.end());
  std::vector<std::vector<std::string>> specs = {base, base, base, base};
  specs[1].push_back("fmax");
  specs[2].push_back("fmean");
  specs[3].push_back("fmax");
  specs[3].push_back("fmean");

  ModelFamily out;
  for (const auto& s : specs) out.fits.push_back(fit_cumulative_logit(design, s, options));
  out.ranking = compare_models(out.fits);
  return out;
}

// ---------------------------------------------------------------------------
// Orchestration

Stage parse_stage(const std::string& s) {
  if (s == "score") return Stage::Score;
  if (s == "classify") return Stage::Classify;
  if (s == "posterior") return Stage::Posterior;
  if (s == "analyze") return Stage::Analyze;
  if (s == "all") return Stage::All;
  throw ConfigError("unknown stage '" + s + "' (score, classify, posterior, analyze, all)");
}

std::string provenance_comment(const RunConfig& config) {
  return std::string("# ") + kHashTag + config_hash(config);
}

std::optional<std::string> provenance_hash(const csv::Table& table) {
  for (const auto& c : table.comments) {
    auto pos = c.find(kHashTag);
    if (pos == std::string::npos) continue;
    std::string h = c.substr(pos + std::string(kHashTag).size());
    while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
    return h;
  }
  return std::nullopt;
}

RunReport run_pipeline(const RunConfig& config, Stage stage) {
  const fs::path out_dir = config.io.out_dir.empty() ? fs::path(".") : fs::path(config.io.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const std::string hash = config_hash(config);
  RunReport report;
  switch (stage) {
    case Stage::Score:
      stage_score(config, out_dir, hash, report);
      break;
    case Stage::Classify:
      stage_classify(config, out_dir, hash, report);
      break;
    case Stage::Posterior:
      stage_posterior(config, out_dir, hash, report);
      break;
    case Stage::Analyze:
      stage_analyze(config, out_dir, hash, report);
      break;
    case Stage::All: {
      stage_score(config, out_dir, hash, report);
      stage_classify(config, out_dir, hash, report);
      stage_posterior(config, out_dir, hash, report);
      stage_analyze(config, out_dir, hash, report);

      ojson manifest;
      manifest["config_sha256"] = hash;
      manifest["config"] = ojson::parse(config_json(config));
      manifest["created_utc"] = utc_timestamp();
      manifest["artifacts"] = ojson::array();
      for (const auto& a : report.artifacts) {
        const fs::path p = out_dir / a;
        manifest["artifacts"].push_back(
            {{"path", a}, {"sha256", sha256_file(p.string())}, {"bytes", fs::file_size(p)}});
      }
      write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
      report.artifacts.push_back("manifest.json");
      break;
    }
  }
  return report;
}

}  // namespace ncci
