#pragma once

#include "ncci/text_edit.hpp"

namespace ncci {

// Scale of the exponential edit-distance channel. Always strictly positive.
class NoiseParams {
 public:
  NoiseParams() = default;
  explicit NoiseParams(double beta);

  double beta() const noexcept { return beta_; }

 private:
  double beta_ = 1.0;
};

/// Unnormalized natural-log channel likelihood of perceiving a sentence at
/// edit distance `d` from the intended one: -beta * d. The normalizing
/// constant over all sentences is never computed; downstream regression
/// absorbs it.
double log_likelihood(EditDistance d, const NoiseParams& params);

}  // namespace ncci
