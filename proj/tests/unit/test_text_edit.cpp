#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "ncci/text_edit.hpp"
#include "oracles.hpp"

using namespace ncci;
using Tokens = std::vector<std::string>;

TEST_SUITE("text_edit") {
  TEST_CASE("tokenize normalizes case and punctuation") {
    CHECK(tokenize("More students have been to Russia than I have.").tokens() ==
          Tokens{"more", "students", "have", "been", "to", "russia", "than", "i", "have"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \t ").empty());
    CHECK(tokenize("I haven't.").tokens() == Tokens{"i", "haven't"});
    CHECK(tokenize("Wait, really?! Yes; no: fine").tokens() ==
          Tokens{"wait", "really", "yes", "no", "fine"});
    CHECK(tokenize("\"Quoted,\" she said").tokens() == Tokens{"quoted", "she", "said"});
  }

  TEST_CASE("tokenize handles typographic quotes and keeps hyphens") {
    CHECK(tokenize("I haven\xE2\x80\x99t").tokens() == Tokens{"i", "haven't"});
    CHECK(tokenize("\xE2\x80\x9CHello\xE2\x80\x9D world\xE2\x80\xA6").tokens() ==
          Tokens{"hello", "world"});
    CHECK(tokenize("More white-collar workers").tokens() ==
          Tokens{"more", "white-collar", "workers"});
    CHECK(tokenize("... !!! ,").empty());
  }

  TEST_CASE("tokenize keeps source text and is stable under re-tokenization") {
    std::mt19937_64 rng(11);
    const char* pieces[] = {"More", "people,", "HAVE", "been", "to", "Russia.", "than", "I",
                            "haven't", "\"we\"", "--", "who?"};
    for (int trial = 0; trial < 300; ++trial) {
      std::string text;
      std::uniform_int_distribution<int> len(0, 10), pick(0, 11);
      for (int i = len(rng); i > 0; --i) text += std::string(pieces[pick(rng)]) + "  ";
      auto t = tokenize(text);
      CHECK(t.source_text() == text);
      CHECK(tokenize(t.joined()) == t);
      for (const auto& tok : t) {
        CHECK_FALSE(tok.empty());
        for (char c : tok) CHECK_FALSE((c >= 'A' && c <= 'Z'));
      }
    }
  }

  TEST_CASE("dld worked examples") {
    const Tokens abc{"a", "b", "c"};
    CHECK(dld(abc, abc).value == 0);
    CHECK(dld(Tokens{"a", "b"}, Tokens{"b", "a"}).value == 1);
    CHECK(dld(Tokens{"a", "b"}, Tokens{"b", "a"}, {.transpositions = false}).value == 2);
    CHECK(dld(tokenize("More people have been to Russia than I have"),
              tokenize("People have been to Russia more than I have"))
              .value == 2);
    CHECK(dld(Tokens{}, Tokens{"a", "b"}).value == 2);
    CHECK(dld(Tokens{}, Tokens{}).value == 0);
    // restricted transposition: "ca" -> "abc" cannot reuse the swapped pair
    CHECK(dld(Tokens{"c", "a"}, Tokens{"a", "b", "c"}).value == 3);
  }

  TEST_CASE("dld matches exhaustive search") {
    std::mt19937_64 rng(2024);
    for (bool swaps : {true, false}) {
      CAPTURE(swaps);
      for (int trial = 0; trial < 1000; ++trial) {
        const auto a = testing::random_tokens(rng, 8, 5);
        const auto b = testing::random_tokens(rng, 8, 5);
        REQUIRE(dld(a, b, {.transpositions = swaps}).value ==
                testing::brute_force_distance(a, b, swaps));
      }
    }
  }

  TEST_CASE("dld properties on random sequences") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
      const auto a = testing::random_tokens(rng, 10, 4);
      const auto b = testing::random_tokens(rng, 10, 4);
      const auto c = testing::random_tokens(rng, 10, 4);
      for (bool swaps : {true, false}) {
        const DldOptions o{swaps};
        const auto ab = dld(a, b, o).value;
        CHECK(ab == dld(b, a, o).value);
        CHECK(ab <= std::max(a.size(), b.size()));
        CHECK((ab == 0) == (a == b));
        auto b2 = b;
        b2.push_back("w" + std::to_string(trial % 4));
        const auto ab2 = dld(a, b2, o).value;
        CHECK(ab2 + 1 >= ab);
        CHECK(ab2 <= ab + 1);
      }
      const DldOptions lev{false};
      CHECK(dld(a, c, lev).value <= dld(a, b, lev).value + dld(b, c, lev).value);
    }
  }
}
