#include "ncci/noise_model.hpp"

#include <cmath>
#include <string>

#include "ncci/error.hpp"

namespace ncci {

NoiseParams::NoiseParams(double beta) : beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw InputError("noise beta must be a finite positive number, got " + std::to_string(beta));
  }
}

double log_likelihood(EditDistance d, const NoiseParams& params) {
  return -params.beta() * static_cast<double>(d.value);
}

}  // namespace ncci
