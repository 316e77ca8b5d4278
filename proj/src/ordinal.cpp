#include "ncci/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "ncci/error.hpp"
#include "ncci/kernels.hpp"

namespace ncci {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::uint64_t fnv1a(std::span<const int> values) {
  std::uint64_t h = 1469598103934665603ull;
  for (int v : values) {
    auto u = static_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) {
      h ^= (u >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Negated log-likelihood and gradient, the quantity the optimizer minimizes.
struct Objective {
  const OrdinalProblem& problem;
  int n_categories;
  bool parallel;
  std::size_t evaluations = 0;

  double operator()(const Eigen::VectorXd& w, Eigen::VectorXd& g) {
    ++evaluations;
    std::vector<double> grad(static_cast<std::size_t>(w.size()));
    const double ll = ordinal_objective(problem, n_categories,
                                        std::span<const double>(w.data(), grad.size()), grad,
                                        parallel);
    g.resize(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) g[i] = -grad[static_cast<std::size_t>(i)];
    return -ll;
  }
};

}  // namespace

double OrdinalFit::coefficient(const std::string& name) const {
  for (const auto& [n, v] : coefficients) {
    if (n == name) return v;
  }
  throw InputError("fit has no coefficient named '" + name + "'");
}

std::string OrdinalFit::name() const {
  if (coefficients.empty()) return "intercepts";
  std::string out;
  for (const auto& [n, _] : coefficients) {
    if (!out.empty()) out += "+";
    out += n;
  }
  return out;
}

std::vector<double> thresholds_from_raw(std::span<const double> raw) {
  std::vector<double> t(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    t[k] = k == 0 ? raw[0] : t[k - 1] + std::exp(raw[k]);
  }
  return t;
}

double ordinal_objective(const OrdinalProblem& problem, int n_categories,
                         std::span<const double> raw, std::span<double> grad, bool parallel) {
  const auto k1 = static_cast<std::size_t>(n_categories - 1);
  const std::size_t p = problem.names.size();
  if (raw.size() != k1 + p || grad.size() != raw.size()) {
    throw InputError("ordinal_objective: parameter vector has the wrong length");
  }
  const auto thresholds = thresholds_from_raw(raw.first(k1));
  kernels::OrdinalRows rows{problem.x, problem.response, problem.response.size(), p, n_categories};
  std::vector<double> g(k1 + p);
  const double ll = parallel
                        ? kernels::parallel::ordinal_loglik_grad(rows, thresholds, raw.subspan(k1), g)
                        : kernels::serial::ordinal_loglik_grad(rows, thresholds, raw.subspan(k1), g);
  // chain rule through threshold_j = raw_0 + sum_{2<=m<=j} exp(raw_m)
  double tail = 0.0;
  for (std::size_t k = k1; k-- > 0;) {
    tail += g[k];
    grad[k] = k == 0 ? tail : tail * std::exp(raw[k]);
  }
  for (std::size_t j = 0; j < p; ++j) grad[k1 + j] = g[k1 + j];
  return ll;
}

OrdinalFit fit_cumulative_logit(const OrdinalProblem& input, const OrdinalOptions& options) {
  const std::size_t n = input.response.size();
  const std::size_t p = input.names.size();
  if (input.x.size() != n * p) throw InputError("fit_cumulative_logit: x has the wrong size");

  std::map<int, std::size_t> level_counts;
  for (int y : input.response) ++level_counts[y];
  if (level_counts.size() < 2) {
    throw InputError("fit_cumulative_logit: response needs at least two observed categories");
  }
  const int K = static_cast<int>(level_counts.size());
  const std::size_t k1 = static_cast<std::size_t>(K - 1);
  if (n < 10 * (k1 + p)) {
    throw InputError("fit_cumulative_logit: " + std::to_string(n) + " rows is too few for " +
                     std::to_string(k1 + p) + " parameters (need 10 per parameter)");
  }

  OrdinalProblem problem;
  problem.x = input.x;
  problem.names = input.names;
  std::map<int, int> index;
  std::vector<int> categories;
  for (const auto& [level, _] : level_counts) {
    index[level] = static_cast<int>(categories.size());
    categories.push_back(level);
  }
  problem.response.reserve(n);
  for (int y : input.response) problem.response.push_back(index[y]);

  // Start at the marginal cumulative logits with zero slopes.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k1 + p));
  {
    double cum = 0.0;
    double prev = 0.0;
    std::size_t k = 0;
    for (const auto& [level, c] : level_counts) {
      if (k == k1) break;
      cum += static_cast<double>(c) / static_cast<double>(n);
      const double t = std::log(cum / (1.0 - cum));
      w[static_cast<Eigen::Index>(k)] = k == 0 ? t : std::log(std::max(t - prev, 1e-6));
      prev = t;
      ++k;
    }
  }

  Objective f{problem, K, options.parallel};
  Eigen::VectorXd g;
  double fx = f(w, g);
  const auto dim = w.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim, dim);
  std::size_t it = 0;
  bool first_update = true;
  bool stalled = false;

  for (; it < options.max_iterations; ++it) {
    if (max_abs(g) < options.gradient_tolerance) break;
    Eigen::VectorXd dir = -H * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      H.setIdentity();
      dir = -g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    Eigen::VectorXd w_new, g_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      w_new = w + step * dir;
      f_new = f(w_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    const Eigen::VectorXd s = w_new - w;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_update) {
        H = Eigen::MatrixXd::Identity(dim, dim) * (sy / y.dot(y));
        first_update = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    w = w_new;
    g = g_new;
    fx = f_new;
  }

  // Newton polish with a finite-difference Hessian of the analytic gradient
  // when quasi-Newton stops short of the tolerance.
  for (int polish = 0; polish < 8 && max_abs(g) >= options.gradient_tolerance; ++polish) {
    Eigen::MatrixXd hess(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(w[j]));
      Eigen::VectorXd wp = w, wm = w, gp, gm;
      wp[j] += h;
      wm[j] -= h;
      f(wp, gp);
      f(wm, gm);
      hess.col(j) = (gp - gm) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = -ldlt.solve(g);
    Eigen::VectorXd w_new = w + step, g_new;
    const double f_new = f(w_new, g_new);
    if (!std::isfinite(f_new) || max_abs(g_new) >= max_abs(g)) break;
    w = w_new;
    g = g_new;
    fx = f_new;
  }

  OrdinalFit fit;
  std::vector<double> raw(w.data(), w.data() + dim);
  fit.thresholds = thresholds_from_raw(std::span<const double>(raw).first(k1));
  for (std::size_t j = 0; j < p; ++j) fit.coefficients.emplace_back(input.names[j], raw[k1 + j]);
  fit.categories = categories;
  fit.log_likelihood = -fx;
  fit.n_obs = n;
  fit.iterations = it;
  fit.gradient_norm = max_abs(g);
  fit.data_signature = fnv1a(input.response);
  fit.converged = fit.gradient_norm < options.gradient_tolerance;

  double largest = 0.0;
  for (const auto& [_, b] : fit.coefficients) largest = std::max(largest, std::abs(b));
  const bool thresholds_diverged =
      std::any_of(fit.thresholds.begin(), fit.thresholds.end(),
                  [&](double t) { return !std::isfinite(t) || std::abs(t) > 4 * options.separation_bound; });
  std::ostringstream diag;
  if (largest > options.separation_bound || thresholds_diverged) {
    fit.separation = true;
    fit.converged = false;
    diag << "separation detected: likelihood increases without bound (max |coefficient| = "
         << largest << ")";
  } else if (!fit.converged) {
    diag << "did not converge after " << it << " iterations" << (stalled ? " (line search stalled)" : "")
         << "; gradient max-norm " << fit.gradient_norm;
  }
  fit.diagnostics = diag.str();
  return fit;
}

OrdinalProblem design_problem(std::span<const DesignRow> design,
                              std::span<const std::string> predictors) {
  OrdinalProblem problem;
  problem.names.assign(predictors.begin(), predictors.end());
  std::vector<double DesignRow::*> columns;
  for (const auto& name : predictors) {
    if (name == "slor") columns.push_back(&DesignRow::slor_z);
    else if (name == "order") columns.push_back(&DesignRow::order_z);
    else if (name == "baseline") columns.push_back(&DesignRow::baseline_z);
    else if (name == "fmax") columns.push_back(&DesignRow::fmax_z);
    else if (name == "fmean") columns.push_back(&DesignRow::fmean_z);
    else throw InputError("unknown predictor '" + name + "' (slor|order|baseline|fmax|fmean)");
  }
  problem.x.reserve(design.size() * columns.size());
  problem.response.reserve(design.size());
  for (const auto& row : design) {
    for (auto col : columns) problem.x.push_back(row.*col);
    problem.response.push_back(row.response);
  }
  return problem;
}

OrdinalFit fit_cumulative_logit(std::span<const DesignRow> design,
                                std::span<const std::string> predictors,
                                const OrdinalOptions& options) {
  return fit_cumulative_logit(design_problem(design, predictors), options);
}

std::vector<double> category_probabilities(const OrdinalFit& fit, std::span<const double> x) {
  if (x.size() != fit.coefficients.size()) {
    throw InputError("category_probabilities: predictor row has the wrong length");
  }
  double eta = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) eta += x[j] * fit.coefficients[j].second;
  std::vector<double> probs;
  double prev = 0.0;
  for (double t : fit.thresholds) {
    const double cum = sigmoid(t - eta);
    probs.push_back(cum - prev);
    prev = cum;
  }
  probs.push_back(sigmoid(eta - fit.thresholds.back()));
  return probs;
}

double aic(double log_likelihood, std::size_t n_parameters) {
  return 2.0 * static_cast<double>(n_parameters) - 2.0 * log_likelihood;
}

std::vector<ModelRank> compare_models(std::span<const OrdinalFit> fits) {
  if (fits.empty()) return {};
  for (const auto& f : fits) {
    if (f.n_obs != fits.front().n_obs || f.data_signature != fits.front().data_signature) {
      throw InputError("compare_models: fits were estimated on different data");
    }
  }
  std::vector<ModelRank> out;
  for (const auto& f : fits) {
    out.push_back({f.name(), aic(f.log_likelihood, f.n_parameters()), 0.0, f.log_likelihood,
                   f.n_parameters()});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ModelRank& a, const ModelRank& b) { return a.aic < b.aic; });
  for (auto& r : out) r.delta = r.aic - out.front().aic;
  return out;
}

}  // namespace ncci
