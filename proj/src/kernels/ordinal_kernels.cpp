#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ncci/error.hpp"
#include "ncci/kernels.hpp"

namespace ncci::kernels {

namespace {

// log(sigmoid(z)) without overflow.
inline double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Neumaier accumulator.
struct Accum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

void check_shapes(const OrdinalRows& rows, std::span<const double> thresholds,
                  std::span<const double> beta, std::span<double> grad) {
  const auto k1 = static_cast<std::size_t>(rows.n_categories - 1);
  if (rows.n_categories < 2 || thresholds.size() != k1 || beta.size() != rows.n_cols ||
      grad.size() != k1 + rows.n_cols || rows.x.size() != rows.n_rows * rows.n_cols ||
      rows.y.size() != rows.n_rows) {
    throw InputError("ordinal kernel: inconsistent problem dimensions");
  }
}

inline double linear_predictor(const OrdinalRows& rows, std::size_t i,
                               std::span<const double> beta) {
  double eta = 0.0;
  const double* xi = rows.x.data() + i * rows.n_cols;
  for (std::size_t j = 0; j < rows.n_cols; ++j) eta += xi[j] * beta[j];
  return eta;
}

// Adds row i's contribution into accumulators [loglik, d thresholds..., d beta...].
inline void accumulate_row(const OrdinalRows& rows, std::size_t i,
                           std::span<const double> thresholds, std::span<const double> beta,
                           Accum* acc) {
  const int y = rows.y[i];
  const double eta = linear_predictor(rows, i, beta);
  const RowTerm t = ordinal_row_term(y, rows.n_categories, eta, thresholds);
  acc[0].add(t.loglik);
  const int k1 = rows.n_categories - 1;
  if (y < k1) acc[1 + y].add(t.d_upper);
  if (y > 0) acc[1 + y - 1].add(t.d_lower);
  const double* xi = rows.x.data() + i * rows.n_cols;
  for (std::size_t j = 0; j < rows.n_cols; ++j) acc[1 + k1 + j].add(t.d_eta * xi[j]);
}

}  // namespace

RowTerm ordinal_row_term(int y, int n_categories, double eta,
                         std::span<const double> thresholds) {
  // P(Y <= k) = sigmoid(threshold[k] - eta)
  RowTerm t;
  const int top = n_categories - 1;
  if (y <= 0) {
    const double b = thresholds[0] - eta;
    t.loglik = log_sigmoid(b);
    t.d_upper = sigmoid(-b);
  } else if (y >= top) {
    const double a = thresholds[top - 1] - eta;
    t.loglik = log_sigmoid(-a);
    t.d_lower = -sigmoid(a);
  } else {
    const double b = thresholds[y] - eta;
    const double a = thresholds[y - 1] - eta;
    // sigmoid(b) - sigmoid(a) = sigmoid(b) sigmoid(-a) (1 - e^(a-b))
    const double gap = b - a;
    t.loglik = log_sigmoid(b) + log_sigmoid(-a) + std::log(-std::expm1(-gap));
    const double inv = 1.0 / std::expm1(gap);
    t.d_upper = sigmoid(-b) + inv;
    t.d_lower = -sigmoid(a) - inv;
  }
  t.d_eta = -(t.d_upper + t.d_lower);
  return t;
}

namespace serial {

double ordinal_loglik_grad(const OrdinalRows& rows, std::span<const double> thresholds,
                           std::span<const double> beta, std::span<double> grad) {
  check_shapes(rows, thresholds, beta, grad);
  std::vector<Accum> acc(1 + grad.size());
  for (std::size_t i = 0; i < rows.n_rows; ++i) {
    accumulate_row(rows, i, thresholds, beta, acc.data());
  }
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = acc[1 + j].value();
  return acc[0].value();
}

}  // namespace serial

namespace parallel {

double ordinal_loglik_grad(const OrdinalRows& rows, std::span<const double> thresholds,
                           std::span<const double> beta, std::span<double> grad) {
  check_shapes(rows, thresholds, beta, grad);
  const std::size_t width = 1 + grad.size();
  const std::size_t n_blocks = (rows.n_rows + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(n_blocks * width, 0.0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
    std::vector<Accum> acc(width);
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t end = std::min(rows.n_rows, begin + kReductionBlock);
    for (std::size_t i = begin; i < end; ++i) {
      accumulate_row(rows, i, thresholds, beta, acc.data());
    }
    double* out = partial.data() + static_cast<std::size_t>(b) * width;
    for (std::size_t j = 0; j < width; ++j) out[j] = acc[j].value();
  }

  std::vector<Accum> total(width);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t j = 0; j < width; ++j) total[j].add(partial[b * width + j]);
  }
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = total[1 + j].value();
  return total[0].value();
}

}  // namespace parallel

}  // namespace ncci::kernels
