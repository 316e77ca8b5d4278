// ncci: command-line entry point. Data goes to files or stdout, logs to stderr.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncci/classifier.hpp"
#include "ncci/config.hpp"
#include "ncci/design.hpp"
#include "ncci/error.hpp"
#include "ncci/lm_scoring.hpp"
#include "ncci/ordinal.hpp"
#include "ncci/pipeline.hpp"
#include "ncci/providers.hpp"
#include "ncci/stats.hpp"
#include "ncci/text_edit.hpp"

namespace {

using ojson = nlohmann::ordered_json;

enum Exit : int {
  kOk = 0,
  kInput = 1,
  kConfig = 2,
  kMissing = 3,
  kProvider = 4,
  kConvergence = 5,
};

void log(const std::string& msg) { std::cerr << "ncci: " << msg << "\n"; }

// Writes to `path`, or stdout when path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw ncci::Error("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path, std::ios::binary);
    if (!file) throw ncci::MissingInputError("cannot open", path);
    in = &file;
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ncci::RunConfig base_config(const std::string& path) {
  return path.empty() ? ncci::RunConfig{} : ncci::load_config(path);
}

// Re-validates a config after flag overrides.
ncci::RunConfig revalidate(const ncci::RunConfig& c) {
  return ncci::parse_config(ncci::config_json(c));
}

ojson correlation_json(const ncci::DistanceCorrelation& c) {
  ojson rows = ojson::array();
  for (const auto& r : c.rows) {
    rows.push_back({{"item_id", r.key.item_id},
                    {"condition", ncci::condition_name(r.key.subject_form, r.key.number)},
                    {"mean_dld", r.mean_dld},
                    {"acceptability_diff", r.acceptability_diff}});
  }
  return {{"r", c.correlation.r},
          {"p", c.correlation.p},
          {"n", c.correlation.n},
          {"plausible_trials", c.plausible_trials},
          {"items", rows}};
}

ojson fit_json(const ncci::OrdinalFit& fit) {
  ojson coefs = ojson::object();
  for (const auto& [name, value] : fit.coefficients) coefs[name] = value;
  return {{"model", fit.name()},
          {"converged", fit.converged},
          {"separation", fit.separation},
          {"log_likelihood", fit.log_likelihood},
          {"aic", ncci::aic(fit.log_likelihood, fit.n_parameters())},
          {"n_obs", fit.n_obs},
          {"thresholds", fit.thresholds},
          {"coefficients", coefs},
          {"iterations", fit.iterations},
          {"gradient_norm", fit.gradient_norm},
          {"diagnostics", fit.diagnostics}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy-channel posteriors for comparative-illusion sentences"};
  app.require_subcommand(1);

  // tokenize
  auto* tok = app.add_subcommand("tokenize", "Print normalized word tokens, one sentence per line");
  std::string tok_text, tok_in = "-";
  tok->add_option("--text", tok_text, "Sentence to tokenize (otherwise lines from --in)");
  tok->add_option("--in", tok_in, "Input file, '-' for stdin");

  // dld
  auto* dld_cmd = app.add_subcommand("dld", "Word-level edit distance between two sentences");
  std::string dld_a, dld_b;
  bool no_transpositions = false;
  dld_cmd->add_option("--a", dld_a)->required();
  dld_cmd->add_option("--b", dld_b)->required();
  dld_cmd->add_flag("--no-transpositions", no_transpositions, "Plain Levenshtein");

  // score
  auto* score = app.add_subcommand("score", "Score sentences (one per line) into a score file");
  std::string score_in, score_out = "-", score_from, score_config;
  std::optional<std::string> score_provider, score_url, score_model;
  std::optional<std::size_t> score_inflight, score_batch;
  score->add_option("--in", score_in, "Sentences, one per line ('-' for stdin)")->required();
  score->add_option("--out", score_out, "Score file (JSON lines)");
  score->add_option("--provider", score_provider)->check(CLI::IsMember({"http", "file"}));
  score->add_option("--from", score_from, "Existing score file for the file provider");
  score->add_option("--url", score_url);
  score->add_option("--model", score_model);
  score->add_option("--max-inflight", score_inflight);
  score->add_option("--batch-size", score_batch);
  score->add_option("--config", score_config);

  // slor
  auto* slor_cmd = app.add_subcommand("slor", "SLOR of every sentence in a score file");
  std::string slor_scores, slor_unigram, slor_out = "-";
  bool slor_no_smoothing = false;
  slor_cmd->add_option("--scores", slor_scores)->required();
  slor_cmd->add_option("--unigram", slor_unigram, "Unigram counts TSV")->required();
  slor_cmd->add_option("--out", slor_out);
  slor_cmd->add_flag("--no-smoothing", slor_no_smoothing);

  // unigram
  auto* uni = app.add_subcommand("unigram", "Build a unigram count table from raw text");
  std::string uni_corpus, uni_out = "-";
  uni->add_option("--corpus", uni_corpus, "Text corpus ('-' for stdin)")->required();
  uni->add_option("--out", uni_out);

  // classify
  auto* cls = app.add_subcommand("classify", "Label corrections with interpretation categories");
  std::string cls_in, cls_out = "-", cls_summary, cls_config;
  cls->add_option("--corrections", cls_in)->required();
  cls->add_option("--out", cls_out, "labeled.csv");
  cls->add_option("--summary", cls_summary, "Write category percentages as JSON");
  cls->add_option("--config", cls_config);

  // posterior
  auto* post = app.add_subcommand("posterior", "Linking-function values per stimulus");
  std::string post_labeled, post_scores, post_stimuli, post_out = "-", post_config;
  std::optional<std::string> post_link;
  std::optional<double> post_beta;
  bool post_dedupe = false, post_all = false;
  post->add_option("--corrections,--labeled", post_labeled, "labeled.csv from classify")->required();
  post->add_option("--scores", post_scores, "Score file covering stimuli and corrections")
      ->required();
  post->add_option("--perceived,--stimuli", post_stimuli, "Stimuli CSV: item_id,subject_form,number,text");
  post->add_option("--link", post_link)->check(CLI::IsMember({"max", "mean", "weighted", "all"}));
  post->add_option("--beta", post_beta);
  post->add_flag("--dedupe", post_dedupe, "Collapse identical corrections");
  post->add_flag("--all-corrections", post_all, "Include implausible corrections");
  post->add_option("--out", post_out);
  post->add_option("--config", post_config);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Statistical analyses");
  analyze->require_subcommand(1);
  auto* corr = analyze->add_subcommand("correlation", "Mean edit distance vs acceptability");
  std::string corr_trials, corr_labeled, corr_out = "-";
  corr->add_option("--trials", corr_trials)->required();
  corr->add_option("--labeled", corr_labeled)->required();
  corr->add_option("--out", corr_out);
  auto* reg = analyze->add_subcommand("regression", "Cumulative-logit fit on a design matrix");
  std::string reg_design, reg_predictors, reg_out = "-";
  bool reg_compare = false;
  reg->add_option("--design", reg_design)->required();
  reg->add_option("--predictors", reg_predictors, "Comma-separated: slor,order,baseline,fmax,fmean")
      ->required();
  reg->add_flag("--compare", reg_compare, "Also fit base, +fmax, +fmean, +fmax+fmean and rank by AIC");
  reg->add_option("--out", reg_out);

  // export design
  auto* exp = app.add_subcommand("export", "Export intermediate tables");
  exp->require_subcommand(1);
  auto* exp_design = exp->add_subcommand("design", "Regression design matrix CSV");
  std::string ed_trials, ed_links, ed_scores, ed_unigram, ed_out = "-";
  bool ed_no_smoothing = false;
  exp_design->add_option("--trials", ed_trials)->required();
  exp_design->add_option("--links", ed_links)->required();
  exp_design->add_option("--scores", ed_scores)->required();
  exp_design->add_option("--unigram", ed_unigram)->required();
  exp_design->add_flag("--no-smoothing", ed_no_smoothing);
  exp_design->add_option("--out", ed_out);

  // run
  auto* run = app.add_subcommand("run", "Run pipeline stages from a config file");
  std::string run_stage = "all", run_config;
  std::optional<std::string> run_out_dir, run_scores, run_provider, run_url, run_model, run_link;
  std::optional<double> run_beta;
  std::optional<std::size_t> run_inflight;
  bool run_dedupe = false;
  run->add_option("--stage", run_stage)
      ->check(CLI::IsMember({"score", "classify", "posterior", "analyze", "all"}));
  run->add_option("--config", run_config)->required();
  run->add_option("--out-dir", run_out_dir);
  run->add_option("--scores-from", run_scores, "Source score file for the file provider");
  run->add_option("--provider", run_provider)->check(CLI::IsMember({"http", "file"}));
  run->add_option("--url", run_url);
  run->add_option("--model", run_model);
  run->add_option("--max-inflight", run_inflight);
  run->add_option("--beta", run_beta);
  run->add_option("--link", run_link);
  run->add_flag("--dedupe", run_dedupe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*tok) {
      std::vector<std::string> lines = tok_text.empty() ? read_lines(tok_in) : std::vector{tok_text};
      for (const auto& l : lines) std::cout << ncci::tokenize(l).joined() << "\n";

    } else if (*dld_cmd) {
      ncci::DldOptions o;
      o.transpositions = !no_transpositions;
      std::cout << ncci::dld(ncci::tokenize(dld_a), ncci::tokenize(dld_b), o).value << "\n";

    } else if (*score) {
      auto c = base_config(score_config);
      if (score_provider) c.scorer.provider = *score_provider;
      if (!score_from.empty()) c.scorer.scores_path = score_from;
      if (score_url) c.scorer.url = *score_url;
      if (score_model) c.scorer.model = *score_model;
      if (score_inflight) c.scorer.max_inflight = *score_inflight;
      if (score_batch) c.scorer.batch_size = *score_batch;
      c = revalidate(c);
      auto texts = read_lines(score_in);
      std::vector<ncci::ScoredSentence> scores;
      if (c.scorer.provider == "http") {
        ncci::HttpScoreProvider p({c.scorer.url, c.scorer.model, c.scorer.max_inflight,
                                   c.scorer.batch_size, c.scorer.timeout_seconds});
        scores = ncci::score_sentences(texts, p);
        log("peak in-flight requests: " + std::to_string(p.last_peak_inflight()));
      } else {
        if (c.scorer.scores_path.empty()) throw ncci::ConfigError("file provider needs --from");
        ncci::FileScoreProvider p(c.scorer.scores_path, c.scorer.model);
        scores = ncci::score_sentences(texts, p);
      }
      Output out(score_out);
      for (const auto& s : scores) out.stream() << ncci::to_jsonl(s) << "\n";
      log("scored " + std::to_string(scores.size()) + " sentences");

    } else if (*slor_cmd) {
      auto table = ncci::UnigramTable::read_tsv(slor_unigram, !slor_no_smoothing);
      Output out(slor_out);
      ncci::csv::write_row(out.stream(), {"text", "model", "words", "slor"});
      for (const auto& s : ncci::read_score_file(slor_scores)) {
        auto words = ncci::tokenize(s.text);
        ncci::csv::write_row(out.stream(),
                             {s.text, s.model_id, std::to_string(words.size()),
                              ncci::csv::format_double(ncci::slor(s, words, table).value)});
      }

    } else if (*uni) {
      ncci::UnigramTable table;
      if (uni_corpus == "-") {
        table = ncci::build_unigram_table(std::cin);
      } else {
        std::ifstream in(uni_corpus, std::ios::binary);
        if (!in) throw ncci::MissingInputError("cannot open corpus", uni_corpus);
        table = ncci::build_unigram_table(in);
      }
      Output out(uni_out);
      table.write_tsv(out.stream());
      log(std::to_string(table.vocab_size()) + " types, " + std::to_string(table.total()) +
          " tokens");

    } else if (*cls) {
      auto c = base_config(cls_config);
      auto corpus = ncci::classify_corpus(ncci::read_corrections(cls_in), c.classifier);
      Output out(cls_out);
      out.stream() << ncci::provenance_comment(c) << "\n";
      ncci::write_labeled(out.stream(), corpus.rows);
      if (!cls_summary.empty()) {
        Output summary(cls_summary);
        summary.stream() << ncci::summary_json(corpus.summary) << "\n";
      }
      log("labeled " + std::to_string(corpus.rows.size()) + " corrections, " +
          ncci::csv::format_double(corpus.summary.overall.plausible_percent()) + "% plausible");

    } else if (*post) {
      auto c = base_config(post_config);
      if (post_link) c.link = *post_link;
      if (post_beta) c.beta = *post_beta;
      if (post_dedupe) c.dedupe = true;
      if (post_all) c.plausible_only = false;
      c = revalidate(c);
      auto labeled = ncci::parse_labeled(ncci::csv::read_file(post_labeled));
      std::vector<ncci::CorrectionRecord> records;
      for (const auto& l : labeled) records.push_back(l.record);
      auto stimuli = post_stimuli.empty() ? ncci::stimuli_from_corrections(records)
                                          : ncci::read_stimuli(post_stimuli);
      ncci::FileScoreProvider scores(post_scores, c.scorer.model);
      auto links = ncci::compute_links(stimuli, labeled, scores,
                                       {c.noise(), c.plausible_only, c.dedupe});
      for (const auto& s : links.skipped) {
        log("warning: no usable correction for item " + s.key.item_id + " " +
            ncci::condition_name(s.key.subject_form, s.key.number));
      }
      Output out(post_out);
      out.stream() << ncci::provenance_comment(c) << "\n";
      ncci::write_links(out.stream(), links.rows, c.link);

    } else if (*corr) {
      auto result = ncci::distance_acceptability_correlation(
          ncci::read_trials(corr_trials), ncci::parse_labeled(ncci::csv::read_file(corr_labeled)));
      Output out(corr_out);
      out.stream() << correlation_json(result).dump(2) << "\n";

    } else if (*reg) {
      auto design = ncci::read_design(reg_design);
      auto predictors = split_list(reg_predictors);
      ojson result;
      bool converged = true;
      if (reg_compare) {
        std::vector<std::string> base;
        for (const auto& p : predictors) {
          if (p != "fmax" && p != "fmean") base.push_back(p);
        }
        auto family = ncci::fit_model_family(design, base);
        result["fits"] = ojson::array();
        for (const auto& f : family.fits) {
          result["fits"].push_back(fit_json(f));
          converged = converged && f.converged;
        }
        result["ranking"] = ojson::array();
        for (const auto& r : family.ranking) {
          result["ranking"].push_back({{"model", r.name}, {"aic", r.aic}, {"delta", r.delta}});
        }
      } else {
        auto fit = ncci::fit_cumulative_logit(design, predictors);
        result = fit_json(fit);
        converged = fit.converged;
      }
      Output out(reg_out);
      out.stream() << result.dump(2) << "\n";
      if (!converged) throw ncci::ConvergenceError("ordinal fit did not converge");

    } else if (*exp_design) {
      auto trials = ncci::read_trials(ed_trials);
      auto links = ncci::parse_links(ncci::csv::read_file(ed_links));
      auto unigram = ncci::UnigramTable::read_tsv(ed_unigram, !ed_no_smoothing);
      ncci::FileScoreProvider scores(ed_scores);
      std::vector<ncci::Stimulus> stimuli;
      for (const auto& [key, v] : links) stimuli.push_back({key, v.perceived_text});
      auto slor = ncci::slor_by_stimulus(stimuli, scores, unigram);
      auto baselines = ncci::compute_baselines(trials);
      auto design = ncci::build_design({trials, &links, &slor, &baselines});
      Output out(ed_out);
      ncci::write_design(out.stream(), design);
      log(std::to_string(design.size()) + " design rows");

    } else if (*run) {
      auto c = ncci::load_config(run_config);
      if (run_out_dir) c.io.out_dir = *run_out_dir;
      if (run_scores) c.scorer.scores_path = *run_scores;
      if (run_provider) c.scorer.provider = *run_provider;
      if (run_url) c.scorer.url = *run_url;
      if (run_model) c.scorer.model = *run_model;
      if (run_inflight) c.scorer.max_inflight = *run_inflight;
      if (run_beta) c.beta = *run_beta;
      if (run_link) c.link = *run_link;
      if (run_dedupe) c.dedupe = true;
      c = revalidate(c);
      log("config " + ncci::config_hash(c));
      auto report = ncci::run_pipeline(c, ncci::parse_stage(run_stage));
      for (const auto& w : report.warnings) log("warning: " + w);
      for (const auto& a : report.artifacts) log("wrote " + c.io.out_dir + "/" + a);
    }
  } catch (const ncci::ConfigError& e) {
    log(std::string("config error: ") + e.what());
    return kConfig;
  } catch (const ncci::MissingInputError& e) {
    log(std::string("missing input: ") + e.what());
    return kMissing;
  } catch (const ncci::ProviderError& e) {
    log(std::string("provider failure: ") + e.what());
    return kProvider;
  } catch (const ncci::ConvergenceError& e) {
    log(std::string("analysis did not converge: ") + e.what());
    return kConvergence;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kInput;
  }
  return kOk;
}
