#include <vector>

#include "ncci/error.hpp"
#include "ncci/kernels.hpp"

namespace ncci::kernels {

namespace serial {

std::vector<std::size_t> batch_dld(std::span<const TokenSequence> a,
                                   std::span<const TokenSequence> b, DldOptions options) {
  if (a.size() != b.size()) throw InputError("batch_dld: sequence lists differ in length");
  std::vector<std::size_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = dld(a[i], b[i], options).value;
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<std::size_t> batch_dld(std::span<const TokenSequence> a,
                                   std::span<const TokenSequence> b, DldOptions options) {
  if (a.size() != b.size()) throw InputError("batch_dld: sequence lists differ in length");
  std::vector<std::size_t> out(a.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = dld(a[k], b[k], options).value;
  }
  return out;
}

}  // namespace parallel

}  // namespace ncci::kernels
