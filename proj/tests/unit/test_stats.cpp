#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "ncci/design.hpp"
#include "ncci/error.hpp"
#include "ncci/stats.hpp"

using namespace ncci;

namespace {

TrialRecord trial(std::string pid, std::string item, SubjectForm f, Number n, int rating, int order = 1) {
  return {std::move(pid), std::move(item), f, n, rating, order};
}

// Two-sided tail of Student's t by Simpson integration of the density.
double t_two_sided_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  // integrate the body [0, |t|] and take the complement
  const int n = 20000;
  const double a = 0.0, b = std::abs(t), h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("z-scores by participant") {
    std::vector<TrialRecord> one = {trial("a", "i1", SubjectForm::Pronoun, Number::Singular, 1),
                                    trial("a", "i2", SubjectForm::Pronoun, Number::Singular, 2),
                                    trial("a", "i3", SubjectForm::Pronoun, Number::Singular, 3)};
    auto z = zscore_by_participant(one);
    REQUIRE(z.trials.size() == 3);
    CHECK(z.trials[0].z_rating == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(z.trials[1].z_rating == doctest::Approx(0.0));
    CHECK(z.trials[2].z_rating == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<TrialRecord> flat = {trial("b", "i1", SubjectForm::Pronoun, Number::Singular, 4),
                                     trial("b", "i2", SubjectForm::Pronoun, Number::Singular, 4),
                                     trial("b", "i3", SubjectForm::Pronoun, Number::Singular, 4)};
    auto zf = zscore_by_participant(flat);
    CHECK(zf.trials.empty());
    CHECK(zf.excluded_participants == std::vector<std::string>{"b"});

    std::vector<TrialRecord> two = {trial("c", "i1", SubjectForm::Pronoun, Number::Singular, 1),
                                    trial("c", "i2", SubjectForm::Pronoun, Number::Singular, 7),
                                    trial("d", "i1", SubjectForm::Pronoun, Number::Singular, 3),
                                    trial("d", "i2", SubjectForm::Pronoun, Number::Singular, 5),
                                    trial("e", "i1", SubjectForm::Pronoun, Number::Singular, 6)};
    auto z2 = zscore_by_participant(two);
    REQUIRE(z2.trials.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(z2.trials[i].z_rating - (i % 2 ? 0.7071 : -0.7071)) < 1e-4);
    }
    CHECK(z2.excluded_participants == std::vector<std::string>{"e"});
  }

  TEST_CASE("z-scores have mean zero and unit sd per participant") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> r(1, 7);
    std::vector<TrialRecord> ts;
    for (int p = 0; p < 5; ++p) {
      for (int i = 0; i < 30; ++i) {
        ts.push_back(trial("p" + std::to_string(p), "i" + std::to_string(i), SubjectForm::Pronoun,
                           Number::Singular, r(rng)));
      }
    }
    auto z = zscore_by_participant(ts);
    for (int p = 0; p < 5; ++p) {
      std::vector<double> xs;
      for (const auto& t : z.trials) {
        if (t.trial.participant_id == "p" + std::to_string(p)) xs.push_back(t.z_rating);
      }
      CHECK(std::abs(mean(xs)) < 1e-12);
      CHECK(sample_sd(xs) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("standardize") {
    std::vector<double> xs = {3.0, 9.0, -2.5, 4.0, 11.0, 0.5};
    auto z = standardize(xs);
    CHECK(std::abs(mean(z)) < 1e-12);
    CHECK(std::abs(sample_sd(z) - 1.0) < 1e-12);
    auto zz = standardize(z);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(zz[i] - z[i]) < 1e-12);
    std::vector<double> constant = {2.0, 2.0, 2.0};
    CHECK_THROWS_AS(standardize(constant, "order"), InputError);
  }

  TEST_CASE("acceptability differences") {
    // two participants rating every cell of two items; illusory = control - 1 everywhere
    std::vector<TrialRecord> ts;
    for (const char* pid : {"a", "b"}) {
      for (const char* item : {"i1", "i2"}) {
        for (SubjectForm f : {SubjectForm::Pronoun, SubjectForm::NounPhrase}) {
          const int control = std::string(pid) == "a" ? 6 : 5;
          const int shift = std::string(item) == "i1" ? 0 : 1;
          ts.push_back(trial(pid, item, f, Number::Control, control - shift));
          ts.push_back(trial(pid, item, f, Number::Singular, control - shift - 2));
          ts.push_back(trial(pid, item, f, Number::Plural, control - shift - 2));
        }
      }
    }
    auto diffs = acceptability_differences(ts);
    REQUIRE(diffs.size() == 8);
    // z-scoring is affine per participant: a constant rating gap maps to a
    // constant z gap of 2 / sd(participant)
    auto z = zscore_by_participant(ts);
    std::vector<double> a_ratings;
    for (const auto& t : ts) {
      if (t.participant_id == "a") a_ratings.push_back(t.rating);
    }
    const double expected = -2.0 / sample_sd(a_ratings);
    for (const auto& d : diffs) CHECK(d.diff == doctest::Approx(expected).epsilon(1e-12));
    CHECK(diffs[0].item_id == "i1");
    CHECK(diffs[0].subject_form == SubjectForm::Pronoun);
    CHECK(diffs[0].number == Number::Singular);
    CHECK(diffs[3].subject_form == SubjectForm::NounPhrase);
    CHECK(diffs[3].number == Number::Plural);

    auto missing = ts;
    std::erase_if(missing, [](const TrialRecord& t) {
      return t.item_id == "i2" && t.subject_form == SubjectForm::NounPhrase && t.number == Number::Plural;
    });
    try {
      acceptability_differences(missing);
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("i2") != std::string::npos);
      CHECK(std::string(e.what()).find("np_plural") != std::string::npos);
    }
  }

  TEST_CASE("pearson") {
    std::vector<double> x = {1, 2, 3};
    CHECK(pearson(x, std::vector<double>{2, 4, 6}).r == 1.0);
    CHECK(pearson(x, std::vector<double>{3, 2, 1}).r == -1.0);
    CHECK(pearson(x, std::vector<double>{2, 4, 6}).p == 0.0);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), InputError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InputError);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{5, 5, 5}), InputError);
  }

  TEST_CASE("pearson of affine transforms is exactly +-1") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(20), up(20), down(20);
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = normal(rng);
        up[i] = 2.5 * x[i] + 1.0;
        down[i] = -0.75 * x[i] + 3.0;
      }
      CHECK(std::abs(pearson(x, up).r - 1.0) < 1e-14);
      CHECK(std::abs(pearson(x, down).r + 1.0) < 1e-14);
    }
  }

  TEST_CASE("pearson p from the t distribution") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal;
    for (std::size_t n : {5u, 12u, 40u}) {
      std::vector<double> x(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = normal(rng);
        y[i] = 0.4 * x[i] + normal(rng);
      }
      const auto c = pearson(x, y);
      CHECK(c.n == n);
      const double df = static_cast<double>(n - 2);
      const double t = c.r * std::sqrt(df / (1 - c.r * c.r));
      CHECK(c.p == doctest::Approx(t_two_sided_p(t, df)).epsilon(1e-7));
    }
  }

  TEST_CASE("trials CSV validation") {
    std::istringstream ok(
        "participant_id,item_id,subject_form,number,rating,trial_order\n"
        "p1,i1,pronoun,control,7,94\n");
    CHECK(parse_trials(csv::parse(ok)).size() == 1);
    std::istringstream bad(
        "participant_id,item_id,subject_form,number,rating,trial_order\n"
        "p1,i1,pronoun,control,7,1\n"
        "p1,i1,pronoun,control,8,2\n");
    try {
      parse_trials(csv::parse(bad));
      FAIL("expected an error");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream order(
        "participant_id,item_id,subject_form,number,rating,trial_order\n"
        "p1,i1,pronoun,control,7,95\n");
    CHECK_THROWS_AS(parse_trials(csv::parse(order)), InputError);
  }
}

TEST_SUITE("design") {
  TEST_CASE("design assembly standardizes every predictor") {
    std::vector<TrialRecord> ts;
    std::map<StimulusKey, LinkValues> links;
    std::map<StimulusKey, double> slor;
    int order = 1;
    for (int i = 0; i < 4; ++i) {
      const std::string item = "i" + std::to_string(i);
      for (SubjectForm f : {SubjectForm::Pronoun, SubjectForm::NounPhrase}) {
        ts.push_back(trial("p", item, f, Number::Control, 6 - i % 2, order++));
        for (Number n : {Number::Singular, Number::Plural}) {
          ts.push_back(trial("p", item, f, n, 1 + (order % 7), order));
          ++order;
          links[{item, f, n}] = {"s", 0.1 * order, 0.05 * order + 0.01 * i, 0.07 * order, 2};
          slor[{item, f, n}] = 1.0 + 0.3 * i - 0.2 * order;
        }
      }
    }
    auto baselines = compute_baselines(ts);
    CHECK(baselines.at({"i1", SubjectForm::NounPhrase}) == 5.0);
    auto rows = build_design({ts, &links, &slor, &baselines});
    REQUIRE(rows.size() == 16);
    std::vector<double DesignRow::*> cols = {&DesignRow::slor_z, &DesignRow::order_z,
                                             &DesignRow::baseline_z, &DesignRow::fmax_z,
                                             &DesignRow::fmean_z};
    for (auto col : cols) {
      std::vector<double> v;
      for (const auto& r : rows) v.push_back(r.*col);
      CHECK(std::abs(mean(v)) < 1e-9);
      CHECK(std::abs(sample_sd(v) - 1.0) < 1e-9);
    }

    std::ostringstream out;
    write_design(out, rows);
    CHECK(out.str().rfind("response,slor_z,order_z,baseline_z,fmax_z,fmean_z,participant_id\n", 0) == 0);
    std::istringstream back(out.str());
    auto parsed = parse_design(csv::parse(back));
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(parsed[i].response == rows[i].response);
      CHECK(parsed[i].fmean_z == rows[i].fmean_z);
      CHECK(parsed[i].participant_id == rows[i].participant_id);
    }
  }

  TEST_CASE("unmatched joins are reported") {
    std::vector<TrialRecord> ts = {trial("p", "i9", SubjectForm::NounPhrase, Number::Plural, 3),
                                   trial("p", "i9", SubjectForm::NounPhrase, Number::Singular, 4)};
    std::map<StimulusKey, LinkValues> links = {
        {{"i9", SubjectForm::NounPhrase, Number::Plural}, {"s", 0.2, 0.1, 0.15, 1}},
        {{"i9", SubjectForm::NounPhrase, Number::Singular}, {"s", 0.3, 0.2, 0.25, 1}}};
    std::map<StimulusKey, double> slor = {{{"i9", SubjectForm::NounPhrase, Number::Plural}, 1.0},
                                          {{"i9", SubjectForm::NounPhrase, Number::Singular}, 2.0}};
    std::map<BaselineKey, double> none;
    try {
      build_design({ts, &links, &slor, &none});
      FAIL("expected an error");
    } catch (const InputError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("i9") != std::string::npos);
      CHECK(msg.find("2 trials lack a baseline") != std::string::npos);
    }
  }
}
