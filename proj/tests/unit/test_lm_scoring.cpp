#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "ncci/error.hpp"
#include "ncci/lm_scoring.hpp"
#include "ncci/providers.hpp"
#include "synthetic.hpp"

using namespace ncci;

namespace {

// Records every call so contract checks can be observed.
class ScriptedScorer : public SentenceScorer {
 public:
  enum class Mode { Ok, Reversed, Short, BadTotal };
  explicit ScriptedScorer(Mode m) : mode_(m) {}
  std::string model_id() const override { return "scripted"; }
  std::vector<ScoredSentence> score(std::span<const std::string> texts) override {
    std::vector<ScoredSentence> out;
    for (const auto& t : texts) out.push_back(testing::synthetic_score(t, "scripted"));
    if (mode_ == Mode::Reversed) std::reverse(out.begin(), out.end());
    if (mode_ == Mode::Short) out.pop_back();
    if (mode_ == Mode::BadTotal) out.front().total_logprob += 0.5;
    return out;
  }

 private:
  Mode mode_;
};

}  // namespace

TEST_SUITE("lm_scoring") {
  TEST_CASE("scored sentence totals") {
    const auto s = make_scored("x", "m", {}, {-1.0, -2.0});
    CHECK(s.total_logprob == -3.0);
    CHECK_NOTHROW(s.validate());
    auto bad = s;
    bad.total_logprob = -3.1;
    CHECK_THROWS_AS(bad.validate(), InputError);
    auto positive = make_scored("x", "m", {}, {0.5});
    CHECK_THROWS_AS(positive.validate(), InputError);
    ScoredSentence empty_lps{"x", "m", {}, {}, 0.0};
    CHECK_THROWS_AS(empty_lps.validate(), InputError);
  }

  TEST_CASE("compensated sum survives cancellation") {
    std::vector<double> v = {1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(v) == 2.0);
  }

  TEST_CASE("log base conversion") {
    CHECK(to_natural_log(-1.0, "e") == -1.0);
    CHECK(to_natural_log(-1.0, "2") == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK(to_natural_log(-2.0, "10") == doctest::Approx(-2.0 * std::log(10.0)).epsilon(1e-15));
    CHECK_THROWS_AS(to_natural_log(-1.0, "7"), ProviderError);
  }

  TEST_CASE("score_sentences enforces the provider contract") {
    std::vector<std::string> texts = {"More people have been to Russia.", "Than I have."};
    ScriptedScorer ok(ScriptedScorer::Mode::Ok);
    auto a = score_sentences(texts, ok);
    auto b = score_sentences(texts, ok);
    REQUIRE(a.size() == 2);
    CHECK(a == b);
    CHECK(a[0].text == texts[0]);

    std::vector<std::string> none;
    CHECK_THROWS_AS(score_sentences(none, ok), InputError);
    std::vector<std::string> blank = {"a", ""};
    CHECK_THROWS_AS(score_sentences(blank, ok), InputError);

    ScriptedScorer rev(ScriptedScorer::Mode::Reversed);
    CHECK_THROWS_AS(score_sentences(texts, rev), ProviderError);
    ScriptedScorer shrt(ScriptedScorer::Mode::Short);
    CHECK_THROWS_AS(score_sentences(texts, shrt), ProviderError);
    ScriptedScorer tot(ScriptedScorer::Mode::BadTotal);
    CHECK_THROWS_AS(score_sentences(texts, tot), ProviderError);
  }

  TEST_CASE("score file round trip and file provider") {
    testing::TempDir dir;
    const auto path = (dir.path() / "s.jsonl").string();
    std::vector<ScoredSentence> entries = {make_scored("x", "m", {"x"}, {-1.0, -2.0}),
                                           testing::synthetic_score("Hello there, world", "m")};
    entries[0].tokens = {"a", "b"};
    write_score_file(path, entries);
    CHECK(read_score_file(path) == entries);

    FileScoreProvider provider(path);
    CHECK(provider.model_id() == "m");
    std::vector<std::string> want = {"x"};
    auto got = score_sentences(want, provider);
    CHECK(got[0].total_logprob == -3.0);
    std::vector<std::string> missing = {"not there"};
    CHECK_THROWS_AS(provider.score(missing), ProviderError);
    CHECK_THROWS_AS(FileScoreProvider((dir.path() / "nope.jsonl").string()), MissingInputError);
  }

  TEST_CASE("score file errors carry line numbers") {
    testing::TempDir dir;
    const auto path = dir.path() / "bad.jsonl";
    testing::spit(path,
                  "{\"text\":\"a\",\"model\":\"m\",\"token_logprobs\":[-1],\"total_logprob\":-1}\n"
                  "{\"text\":\"b\",\"model\":\"m\",\"token_logprobs\":[-1],\"total_logprob\":-2}\n");
    try {
      read_score_file(path.string());
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    // service-grade numerics are tolerated and the total is recomputed
    testing::spit(path,
                  "{\"text\":\"a\",\"model\":\"m\",\"token_logprobs\":[-1,-2],\"total_logprob\":-3.0000004}\n");
    CHECK(read_score_file(path.string())[0].total_logprob == -3.0);
  }

  TEST_CASE("file provider model selection") {
    std::vector<ScoredSentence> mixed = {make_scored("a", "m1", {}, {-1}),
                                         make_scored("a", "m2", {}, {-2})};
    CHECK_THROWS_AS(FileScoreProvider{mixed}, ProviderError);
    FileScoreProvider m2(mixed, "m2");
    std::vector<std::string> a = {"a"};
    CHECK(m2.score(a)[0].total_logprob == -2.0);
    std::vector<ScoredSentence> conflict = {make_scored("a", "m", {}, {-1}),
                                            make_scored("a", "m", {}, {-2})};
    CHECK_THROWS_AS(FileScoreProvider{conflict}, ProviderError);
  }

  TEST_CASE("unigram probabilities") {
    UnigramTable t({{"a", 2}, {"b", 2}}, false);
    CHECK(unigram_logprob(tokenize("a"), t) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(unigram_logprob(tokenize("a"), t) == doctest::Approx(-0.693147).epsilon(1e-6));
    CHECK(unigram_logprob(tokenize("a b"), t) == doctest::Approx(-1.386294).epsilon(1e-6));
    CHECK_THROWS_AS(unigram_logprob(tokenize("zzz"), t), InputError);
    CHECK_THROWS_AS(unigram_logprob(tokenize(""), t), InputError);

    UnigramTable s({{"a", 2}, {"b", 2}}, true);
    CHECK(s.vocab_size() == 2);
    CHECK(unigram_logprob(tokenize("zzz"), s) == doctest::Approx(std::log(1.0 / 7.0)).epsilon(1e-12));
    CHECK(unigram_logprob(tokenize("zzz"), s) == doctest::Approx(-1.945910).epsilon(1e-6));
    CHECK(s.log_prob("a") == doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-12));
    CHECK(unigram_logprob(tokenize("a zzz b"), s) < 0.0);
  }

  TEST_CASE("unigram table construction and TSV") {
    std::vector<std::string> stream = {"a", "b", "a"};
    auto t = build_unigram_table(stream);
    CHECK(t.count("a") == 2);
    CHECK(t.count("b") == 1);
    CHECK(t.total() == 3);

    std::istringstream tsv("the\t100\nof\t50");
    auto parsed = UnigramTable::parse_tsv(tsv);
    CHECK(parsed.count("the") == 100);
    CHECK(parsed.count("of") == 50);
    CHECK(parsed.total() == 150);

    std::istringstream corpus("The cat sat.\nthe CAT, the dog!\n");
    auto built = build_unigram_table(corpus);
    CHECK(built.count("the") == 3);
    CHECK(built.count("cat") == 2);
    std::ostringstream out;
    built.write_tsv(out);
    std::istringstream back(out.str());
    CHECK(UnigramTable::parse_tsv(back) == built);

    std::istringstream empty("");
    CHECK_THROWS_AS(build_unigram_table(empty), InputError);
    std::istringstream bad("the\t100\nof\tx\n");
    try {
      UnigramTable::parse_tsv(bad);
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream zero("the\t0\n");
    CHECK_THROWS_AS(UnigramTable::parse_tsv(zero), InputError);
  }

  TEST_CASE("SLOR arithmetic") {
    CHECK(slor(-30.0, -30.0, 10).value == 0.0);
    CHECK(slor(-20.0, -30.0, 10).value == 1.0);
    CHECK(std::abs(slor(-20.0, -30.0, 10).value - 1.0) < 1e-12);
    CHECK(slor(-35.0, -30.0, 5).value == -1.0);
    CHECK_THROWS_AS(slor(-1.0, -1.0, 0), InputError);
  }

  TEST_CASE("SLOR counts words, not model tokens") {
    UnigramTable t({{"more", 10}, {"people", 5}, {"came", 5}}, true);
    auto words = tokenize("More people came.");
    // five subword tokens for three words
    auto s = make_scored("More people came.", "m", {"Mo", "re", "peo", "ple", "came"},
                         {-1.0, -0.5, -2.0, -0.5, -3.0});
    const double expected = (-7.0 - unigram_logprob(words, t)) / 3.0;
    CHECK(slor(s, words, t).value == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::isfinite(slor(make_scored("Zebras", "m", {}, {-9.0}), tokenize("Zebras"), t).value));
  }

  TEST_CASE("scaling all counts leaves unsmoothed SLOR unchanged") {
    std::map<std::string, std::uint64_t> counts = {{"a", 3}, {"b", 7}, {"c", 11}, {"d", 1}};
    UnigramTable base(counts, false);
    for (std::uint64_t k : {2ull, 3ull, 17ull, 1000ull}) {
      auto scaled = counts;
      for (auto& [w, c] : scaled) c *= k;
      UnigramTable t(scaled, false);
      for (const char* w : {"a", "b", "c", "d"}) CHECK(t.log_prob(w) == base.log_prob(w));
      auto words = tokenize("a b c d a");
      auto s = make_scored("a b c d a", "m", {}, {-3.0, -1.0, -4.0, -1.0, -5.0});
      CHECK(slor(s, words, t).value == slor(s, words, base).value);
    }
  }
}
