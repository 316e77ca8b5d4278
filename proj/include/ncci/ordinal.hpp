#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncci/design.hpp"

namespace ncci {

// Proportional-odds cumulative-logit model:
//   P(Y <= k | x) = sigmoid(threshold_k - x . beta)
// fit by maximum likelihood. Stands in for a Bayesian multilevel ordinal
// model; there is no participant random effect.
struct OrdinalFit {
  std::vector<double> thresholds;                           // strictly ascending
  std::vector<std::pair<std::string, double>> coefficients;  // in predictor order
  std::vector<int> categories;  // observed response levels, ascending
  double log_likelihood = 0.0;
  bool converged = false;
  bool separation = false;
  std::size_t n_obs = 0;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  // max-norm at the returned point
  std::string diagnostics;
  std::uint64_t data_signature = 0;  // hash of the response vector

  std::size_t n_parameters() const { return thresholds.size() + coefficients.size(); }
  double coefficient(const std::string& name) const;
  std::string name() const;
};

// Column-major-agnostic input: x is row-major n x names.size().
struct OrdinalProblem {
  std::vector<double> x;
  std::vector<int> response;
  std::vector<std::string> names;
};

struct OrdinalOptions {
  std::size_t max_iterations = 1000;
  double gradient_tolerance = 1e-6;
  // Coefficients beyond this magnitude on standardized predictors indicate
  // separation.
  double separation_bound = 25.0;
  bool parallel = true;
};

OrdinalFit fit_cumulative_logit(const OrdinalProblem& problem, const OrdinalOptions& options = {});

// Predictor names: slor, order, baseline, fmax, fmean.
OrdinalProblem design_problem(std::span<const DesignRow> design,
                              std::span<const std::string> predictors);
OrdinalFit fit_cumulative_logit(std::span<const DesignRow> design,
                                std::span<const std::string> predictors,
                                const OrdinalOptions& options = {});

// Unconstrained parameters: [a_1, log gap_2, ..., log gap_{K-1}, beta...].
std::vector<double> thresholds_from_raw(std::span<const double> raw);
// Log-likelihood and its gradient in the unconstrained parameterization.
double ordinal_objective(const OrdinalProblem& problem, int n_categories,
                         std::span<const double> raw, std::span<double> grad,
                         bool parallel = true);

// Per-category probabilities for one predictor row.
std::vector<double> category_probabilities(const OrdinalFit& fit, std::span<const double> x);

struct ModelRank {
  std::string name;
  double aic = 0.0;
  double delta = 0.0;
  double log_likelihood = 0.0;
  std::size_t n_parameters = 0;
};

double aic(double log_likelihood, std::size_t n_parameters);

/// Ascending AIC. AIC ordering is a desk-scale surrogate for leave-one-out
/// information criteria; absolute values are not comparable to LOOIC.
std::vector<ModelRank> compare_models(std::span<const OrdinalFit> fits);

}  // namespace ncci
