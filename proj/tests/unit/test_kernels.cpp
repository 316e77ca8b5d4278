#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "ncci/kernels.hpp"
#include "oracles.hpp"

using namespace ncci;

namespace {

struct Case {
  std::vector<double> x;
  std::vector<int> y;
  std::size_t n = 0, p = 0;
  int k = 0;
};

Case random_case(std::size_t n, std::size_t p, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> cat(0, k - 1);
  Case c{std::vector<double>(n * p), std::vector<int>(n), n, p, k};
  for (auto& v : c.x) v = normal(rng);
  for (auto& v : c.y) v = cat(rng);
  return c;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("parallel log-likelihood and gradient agree with the serial reference") {
    const std::vector<double> thresholds = {-1.2, -0.4, 0.3, 0.9, 1.6};
    const std::vector<double> beta = {0.4, -0.7, 0.1};
    // sizes straddle the reduction block boundary
    for (std::size_t n : {1ul, 255ul, 256ul, 257ul, 1000ul, 4099ul}) {
      const auto c = random_case(n, 3, 6, n);
      kernels::OrdinalRows rows{c.x, c.y, c.n, c.p, c.k};
      std::vector<double> gs(5 + 3), gp(5 + 3);
      const double ls = kernels::serial::ordinal_loglik_grad(rows, thresholds, beta, gs);
      const double lp = kernels::parallel::ordinal_loglik_grad(rows, thresholds, beta, gp);
      CHECK(std::abs(ls - lp) <= 1e-10 * std::max(1.0, std::abs(ls)));
      for (std::size_t i = 0; i < gs.size(); ++i) {
        CHECK(std::abs(gs[i] - gp[i]) <= 1e-10 * std::max(1.0, std::abs(gs[i])));
      }
    }
  }

  TEST_CASE("parallel reduction is reproducible") {
    const auto c = random_case(3000, 2, 4, 99);
    kernels::OrdinalRows rows{c.x, c.y, c.n, c.p, c.k};
    const std::vector<double> thresholds = {-0.5, 0.2, 1.0};
    const std::vector<double> beta = {0.3, 0.3};
    std::vector<double> g1(5), g2(5);
    const double a = kernels::parallel::ordinal_loglik_grad(rows, thresholds, beta, g1);
    const double b = kernels::parallel::ordinal_loglik_grad(rows, thresholds, beta, g2);
    CHECK(a == b);
    CHECK(g1 == g2);
  }

  TEST_CASE("row term matches the category probability") {
    const std::vector<double> thresholds = {-1.0, 0.5};
    auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double eta = 0.3;
    CHECK(kernels::ordinal_row_term(0, 3, eta, thresholds).loglik ==
          doctest::Approx(std::log(sigmoid(-1.0 - eta))).epsilon(1e-12));
    CHECK(kernels::ordinal_row_term(1, 3, eta, thresholds).loglik ==
          doctest::Approx(std::log(sigmoid(0.5 - eta) - sigmoid(-1.0 - eta))).epsilon(1e-12));
    CHECK(kernels::ordinal_row_term(2, 3, eta, thresholds).loglik ==
          doctest::Approx(std::log(1.0 - sigmoid(0.5 - eta))).epsilon(1e-12));
  }

  TEST_CASE("batch distances agree") {
    std::mt19937_64 rng(17);
    std::vector<TokenSequence> a, b;
    for (int i = 0; i < 300; ++i) {
      a.push_back(TokenSequence::from_tokens(testing::random_tokens(rng, 9, 5)));
      b.push_back(TokenSequence::from_tokens(testing::random_tokens(rng, 9, 5)));
    }
    for (bool swaps : {true, false}) {
      DldOptions opts;
      opts.transpositions = swaps;
      const auto s = kernels::serial::batch_dld(a, b, opts);
      const auto p = kernels::parallel::batch_dld(a, b, opts);
      CHECK(s == p);
      for (std::size_t i = 0; i < 20; ++i) {
        CHECK(s[i] == testing::brute_force_distance(a[i].tokens(), b[i].tokens(), swaps));
      }
    }
  }
}
