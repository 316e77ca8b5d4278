#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "ncci/lm_scoring.hpp"
#include "ncci/noise_model.hpp"
#include "ncci/text_edit.hpp"

namespace ncci {

// Approximate noisy-channel posterior of one intended sentence given the
// perceived one, all terms in natural log.
struct PosteriorEstimate {
  std::string perceived_text;
  std::string intended_text;
  double log_prior = 0.0;     // log p_m(intended)
  double log_noise = 0.0;     // -beta * distance
  double log_evidence = 0.0;  // log p_m(perceived)
  double log_posterior = 0.0;

  // Unnormalized; may exceed 1.
  double probability() const;
};

/// Both sentences must come from the same model; throws InputError otherwise.
PosteriorEstimate posterior_estimate(const ScoredSentence& intended,
                                     const ScoredSentence& perceived, EditDistance d,
                                     const NoiseParams& params);

struct LinkValues {
  std::string perceived_text;
  double f_max = 0.0;
  double f_mean = 0.0;
  // sum p^2 / sum p
  double f_weighted = 0.0;
  std::size_t n_alternatives = 0;
};

/// Aggregates probability-space posteriors over the alternatives of one
/// perceived sentence. Duplicates count once per occurrence. Sums are taken in
/// log space so large or tiny posteriors neither overflow nor underflow.
LinkValues link_values(const ScoredSentence& perceived,
                       std::span<const PosteriorEstimate> alternatives);

}  // namespace ncci
