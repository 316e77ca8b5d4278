#include "ncci/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ncci/error.hpp"

namespace ncci {

namespace {

double log_sum_exp(std::span<const double> xs) {
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (std::isinf(hi)) return hi;
  std::vector<double> terms;
  terms.reserve(xs.size());
  for (double x : xs) terms.push_back(std::exp(x - hi));
  return hi + std::log(compensated_sum(terms));
}

}  // namespace

double PosteriorEstimate::probability() const { return std::exp(log_posterior); }

PosteriorEstimate posterior_estimate(const ScoredSentence& intended,
                                     const ScoredSentence& perceived, EditDistance d,
                                     const NoiseParams& params) {
  if (intended.model_id != perceived.model_id) {
    throw InputError("posterior_estimate: intended sentence scored by '" + intended.model_id +
                     "' but perceived sentence by '" + perceived.model_id + "'");
  }
  PosteriorEstimate est;
  est.perceived_text = perceived.text;
  est.intended_text = intended.text;
  est.log_prior = intended.total_logprob;
  est.log_noise = log_likelihood(d, params);
  est.log_evidence = perceived.total_logprob;
  est.log_posterior = est.log_prior + est.log_noise - est.log_evidence;
  return est;
}

LinkValues link_values(const ScoredSentence& perceived,
                       std::span<const PosteriorEstimate> alternatives) {
  if (alternatives.empty()) {
    throw InputError("link_values: no alternatives for \"" + perceived.text + "\"");
  }
  std::vector<double> logs;
  std::vector<double> doubled;
  logs.reserve(alternatives.size());
  doubled.reserve(alternatives.size());
  for (const auto& a : alternatives) {
    if (a.perceived_text != perceived.text) {
      throw InputError("link_values: alternative for \"" + a.perceived_text +
                       "\" mixed into the set for \"" + perceived.text + "\"");
    }
    logs.push_back(a.log_posterior);
    doubled.push_back(2.0 * a.log_posterior);
  }
  const double n = static_cast<double>(alternatives.size());
  const double log_sum = log_sum_exp(logs);

  LinkValues out;
  out.perceived_text = perceived.text;
  out.n_alternatives = alternatives.size();
  out.f_max = std::exp(*std::max_element(logs.begin(), logs.end()));
  out.f_mean = std::exp(log_sum - std::log(n));
  out.f_weighted = std::exp(log_sum_exp(doubled) - log_sum);
  // max >= weighted >= mean holds exactly; keep rounding from breaking it
  out.f_mean = std::min(out.f_mean, out.f_max);
  out.f_weighted = std::clamp(out.f_weighted, out.f_mean, out.f_max);
  return out;
}

}  // namespace ncci
