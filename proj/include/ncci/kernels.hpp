#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ncci/text_edit.hpp"

// Data-parallel inner loops. Each kernel has a serial reference used by the
// tests and benchmarks, and an OpenMP version used by the library.
namespace ncci::kernels {

// Rows of a cumulative-logit problem. `x` is row-major n_rows x n_cols;
// `y` holds category indices 0..n_categories-1.
struct OrdinalRows {
  std::span<const double> x;
  std::span<const int> y;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  int n_categories = 0;
};

// Log-likelihood contribution of one row and its partial derivatives with
// respect to the linear predictor and the two active thresholds.
struct RowTerm {
  double loglik = 0.0;
  double d_upper = 0.0;  // d/d threshold[y]        (0 when y is the top category)
  double d_lower = 0.0;  // d/d threshold[y - 1]    (0 when y is the bottom category)
  double d_eta = 0.0;    // d/d (x . beta)
};

RowTerm ordinal_row_term(int y, int n_categories, double eta, std::span<const double> thresholds);

// Writes d/d thresholds into grad[0 .. K-2] and d/d beta into
// grad[K-1 .. K-2+n_cols]. Returns the log-likelihood.
namespace serial {
double ordinal_loglik_grad(const OrdinalRows& rows, std::span<const double> thresholds,
                           std::span<const double> beta, std::span<double> grad);
std::vector<std::size_t> batch_dld(std::span<const TokenSequence> a,
                                   std::span<const TokenSequence> b, DldOptions options);
}  // namespace serial

namespace parallel {
// Rows are reduced in fixed-size blocks with compensated sums and the block
// partials combined in block order, so the result does not depend on the
// thread count.
double ordinal_loglik_grad(const OrdinalRows& rows, std::span<const double> thresholds,
                           std::span<const double> beta, std::span<double> grad);
std::vector<std::size_t> batch_dld(std::span<const TokenSequence> a,
                                   std::span<const TokenSequence> b, DldOptions options);
}  // namespace parallel

inline constexpr std::size_t kReductionBlock = 256;

}  // namespace ncci::kernels
