#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace ncci::testing {

namespace {

using Seq = std::vector<std::string>;

std::size_t search(const Seq& a, std::size_t i, const Seq& b, std::size_t j, bool swaps) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  // keep or substitute the next word of each side
  std::size_t best = search(a, i + 1, b, j + 1, swaps) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, search(a, i + 1, b, j, swaps) + 1);  // delete a[i]
  best = std::min(best, search(a, i, b, j + 1, swaps) + 1);  // insert b[j]
  if (swaps && i + 1 < a.size() && j + 1 < b.size() && a[i] == b[j + 1] && a[i + 1] == b[j]) {
    best = std::min(best, search(a, i + 2, b, j + 2, swaps) + 1);
  }
  return best;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::size_t brute_force_distance(const Seq& a, const Seq& b, bool transpositions) {
  return search(a, 0, b, 0, transpositions);
}

Seq random_tokens(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> len(0, max_len), word(0, vocab - 1);
  Seq out(len(rng));
  for (auto& t : out) t = "w" + std::to_string(word(rng));
  return out;
}

std::vector<double> irls_logistic(const std::vector<double>& x, const std::vector<int>& y,
                                  std::size_t p) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd Y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    X(r, 0) = 1.0;
    for (std::size_t c = 0; c < p; ++c) {
      X(r, static_cast<Eigen::Index>(c + 1)) = x[static_cast<std::size_t>(r) * p + c];
    }
    Y(r) = y[static_cast<std::size_t>(r)];
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd mu = (X * w).unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd weight = mu.array() * (1.0 - mu.array());
    Eigen::MatrixXd H = X.transpose() * weight.asDiagonal() * X;
    Eigen::VectorXd step = H.ldlt().solve(X.transpose() * (Y - mu));
    w += step;
    if (step.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return {w.data(), w.data() + w.size()};
}

OrdinalProblem sample_cumulative_logit(std::size_t n, const std::vector<double>& thresholds,
                                       const std::vector<double>& beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OrdinalProblem problem;
  const std::size_t p = beta.size();
  for (std::size_t c = 0; c < p; ++c) problem.names.push_back("x" + std::to_string(c + 1));
  problem.x.resize(n * p);
  problem.response.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double eta = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      problem.x[r * p + c] = normal(rng);
      eta += problem.x[r * p + c] * beta[c];
    }
    const double u = unit(rng);
    int k = 0;
    while (k < static_cast<int>(thresholds.size()) &&
           u > sigmoid(thresholds[static_cast<std::size_t>(k)] - eta)) {
      ++k;
    }
    problem.response[r] = k + 1;
  }
  return problem;
}

double gradient_relative_error(const OrdinalProblem& problem, int n_categories,
                               const std::vector<double>& raw, double h) {
  OrdinalProblem zero_based = problem;
  for (auto& r : zero_based.response) r -= 1;
  std::vector<double> analytic(raw.size()), scratch(raw.size());
  ordinal_objective(zero_based, n_categories, raw, analytic, false);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto up = raw, down = raw;
    up[i] += h;
    down[i] -= h;
    const double fd = (ordinal_objective(zero_based, n_categories, up, scratch, false) -
                       ordinal_objective(zero_based, n_categories, down, scratch, false)) /
                      (2.0 * h);
    num += (analytic[i] - fd) * (analytic[i] - fd);
    den += fd * fd;
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace ncci::testing
