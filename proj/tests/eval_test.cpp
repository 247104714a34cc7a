// Tests for Levenshtein scoring, aggregation, cross-validation folds,
// Welch's t-test, and corpus statistics.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "metron/cross_validation.hpp"
#include "metron/eval.hpp"
#include "metron/synthetic.hpp"

namespace metron {
namespace {

using eval::aggregate;
using eval::levenshtein;
using eval::LineScore;
using eval::score_line;
using eval::welch_t_test;

StressSeq seq(const std::string& s) { return parse_stress_string(s); }

TEST(LevenshteinTest, HandCases) {
  EXPECT_EQ(levenshtein(seq("+-+-"), seq("+-+-")), 0);
  EXPECT_EQ(levenshtein(seq(""), seq("-+")), 2);
  EXPECT_EQ(levenshtein(seq("+-+-"), seq("+-+")), 1);
  EXPECT_EQ(levenshtein(seq("++++"), seq("----")), 4);
  EXPECT_EQ(levenshtein(seq("-+-+"), seq("+-+-")), 2);
}

TEST(LevenshteinTest, MetricAxiomsProperty) {
  std::mt19937_64 rng(6);
  auto random_seq = [&](int max_len) {
    StressSeq s;
    int len = static_cast<int>(rng() % (max_len + 1));
    for (int i = 0; i < len; ++i)
      s.push_back(rng() % 2 ? StressLabel::Stressed : StressLabel::Unstressed);
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    StressSeq a = random_seq(12), b = random_seq(12), c = random_seq(12);
    int dab = levenshtein(a, b);
    EXPECT_GE(dab, 0);
    EXPECT_EQ(levenshtein(a, a), 0);
    if (dab == 0) EXPECT_EQ(a, b);
    EXPECT_EQ(dab, levenshtein(b, a));
    EXPECT_LE(levenshtein(a, c), dab + levenshtein(b, c));
  }
}

TEST(ScoreLineTest, MultiReferenceMatch) {
  LineScore s = score_line(seq("-+-+"), {seq("+-+-"), seq("-+-+")});
  EXPECT_EQ(s.errors, 0);
  EXPECT_TRUE(s.exact);
  EXPECT_EQ(s.ref_len, 4);
}

TEST(ScoreLineTest, OffByOneInsertion) {
  LineScore s = score_line(seq("-+-+-+-+-++"), {seq("-+-+-+-+-+")});
  EXPECT_EQ(s.errors, 1);
  EXPECT_FALSE(s.exact);
  EXPECT_EQ(s.ref_len, 10);
  EXPECT_EQ(s.pred_len, 11);
}

TEST(ScoreLineTest, EmptyPredCountsDeletions) {
  LineScore s = score_line({}, {seq("-+-+-")});
  EXPECT_EQ(s.errors, 5);
}

TEST(ScoreLineTest, DistanceTieTakesLongerReference) {
  // both references are distance 1 away; the longer one must win
  LineScore s = score_line(seq("-+-"), {seq("-+"), seq("-+-+")});
  EXPECT_EQ(s.errors, 1);
  EXPECT_EQ(s.ref_len, 4);
}

TEST(ScoreLineTest, NoReferencesIsAnError) {
  EXPECT_THROW(score_line(seq("-+"), {}), std::invalid_argument);
}

TEST(AggregateTest, AllExactIsHundredHundred) {
  std::vector<LineScore> scores(10, LineScore{0, 10, 10, true});
  eval::EvalReport r = aggregate(scores);
  EXPECT_DOUBLE_EQ(r.per_syllable, 100.0);
  EXPECT_DOUBLE_EQ(r.per_line, 100.0);
}

TEST(AggregateTest, OneSubstitutionInTenLines) {
  // ten 10-syllable lines, one substitution in one of them
  std::vector<LineScore> scores(9, LineScore{0, 10, 10, true});
  scores.push_back(LineScore{1, 10, 10, false});
  eval::EvalReport r = aggregate(scores);
  EXPECT_DOUBLE_EQ(r.per_syllable, 99.0);
  EXPECT_DOUBLE_EQ(r.per_line, 90.0);
  EXPECT_EQ(r.total_syllables, 100);
  EXPECT_EQ(r.total_lines, 10);
}

TEST(AggregateTest, EmptyInputIsAnError) {
  EXPECT_THROW(aggregate({}), std::invalid_argument);
}

TEST(AggregateTest, PerLineHundredImpliesPerSyllableHundred) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LineScore> scores;
    int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      int len = 1 + static_cast<int>(rng() % 12);
      scores.push_back(LineScore{0, len, len, true});
    }
    eval::EvalReport r = aggregate(scores);
    EXPECT_DOUBLE_EQ(r.per_line, 100.0);
    EXPECT_DOUBLE_EQ(r.per_syllable, 100.0);
  }
}

TEST(FoldTest, HundredLinesTenFolds) {
  eval::FoldPlan plan = eval::make_folds(100, 10, 42);
  std::set<size_t> seen;
  for (const auto& fold : plan.folds) {
    EXPECT_EQ(fold.size(), 10u);
    for (size_t idx : fold) EXPECT_TRUE(seen.insert(idx).second) << "folds must be disjoint";
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(FoldTest, NearEqualSizes) {
  eval::FoldPlan plan = eval::make_folds(103, 10, 1);
  size_t lo = 1000, hi = 0;
  for (const auto& fold : plan.folds) {
    lo = std::min(lo, fold.size());
    hi = std::max(hi, fold.size());
  }
  EXPECT_LE(hi - lo, 1u);
}

TEST(FoldTest, PreconditionErrors) {
  EXPECT_THROW(eval::make_folds(100, 1, 1), std::invalid_argument);
  EXPECT_THROW(eval::make_folds(5, 10, 1), std::invalid_argument);
}

TEST(CrossValidateTest, OracleModelScoresPerfect) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Iamb, 5}, 50, 0.3, 12);
  eval::Trainer oracle = [](const std::vector<Line>&, uint64_t) {
    return eval::Predictor([](const Line& line) { return line.gold[0]; });
  };
  eval::EvalReport r = eval::cross_validate(corpus, oracle, {.folds = 10, .seed = 5});
  EXPECT_DOUBLE_EQ(r.per_syllable, 100.0);
  EXPECT_DOUBLE_EQ(r.per_line, 100.0);
  EXPECT_EQ(r.total_lines, 50);
  EXPECT_EQ(r.per_fold.size(), 10u);
}

TEST(CrossValidateTest, MajorityBaselineNearFiftyOnIambs) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Iamb, 5}, 100, 0.0, 31);
  eval::Trainer majority = [](const std::vector<Line>&, uint64_t) {
    return eval::Predictor([](const Line& line) {
      return StressSeq(line.gold[0].size(), StressLabel::Unstressed);
    });
  };
  eval::EvalReport r = eval::cross_validate(corpus, majority, {.folds = 10, .seed = 5});
  EXPECT_NEAR(r.per_syllable, 50.0, 2.0);
  EXPECT_DOUBLE_EQ(r.per_line, 0.0);
}

// Evaluation must never see its own training lines.
TEST(CrossValidateTest, TrainAndHeldOutAreDisjoint) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Trochee, 4}, 37, 0.0, 77);
  auto train_ids = std::make_shared<std::vector<std::set<std::string>>>();
  auto eval_ids = std::make_shared<std::vector<std::set<std::string>>>();
  eval::Trainer spy = [=](const std::vector<Line>& train, uint64_t) {
    std::set<std::string> ids;
    for (const Line& l : train) ids.insert(l.id);
    train_ids->push_back(ids);
    size_t fold = train_ids->size() - 1;
    eval_ids->push_back({});
    return eval::Predictor([=](const Line& line) {
      (*eval_ids)[fold].insert(line.id);
      return line.gold[0];
    });
  };
  eval::cross_validate(corpus, spy, {.folds = 5, .seed = 3, .jobs = 1});
  std::set<std::string> all_eval;
  for (size_t f = 0; f < train_ids->size(); ++f) {
    for (const std::string& id : (*eval_ids)[f]) {
      EXPECT_FALSE((*train_ids)[f].count(id)) << "fold " << f << " evaluated a training line";
      all_eval.insert(id);
    }
    EXPECT_EQ((*train_ids)[f].size() + (*eval_ids)[f].size(), corpus.lines.size());
  }
  EXPECT_EQ(all_eval.size(), corpus.lines.size()) << "every line is evaluated exactly once";
}

TEST(CrossValidateTest, ParallelAndSerialAgree) {
  Corpus corpus = generate_synthetic(MeterSpec{Foot::Iamb, 4}, 40, 0.5, 9);
  eval::Trainer noisy_oracle = [](const std::vector<Line>&, uint64_t fold_seed) {
    return eval::Predictor([fold_seed](const Line& line) {
      StressSeq s = line.gold[0];
      if (fold_seed % 3 == 0) s[0] = StressLabel::Stressed;  // deterministic per-fold quirk
      return s;
    });
  };
  eval::EvalReport serial = eval::cross_validate(corpus, noisy_oracle, {.folds = 8, .seed = 2, .jobs = 1});
  eval::EvalReport parallel = eval::cross_validate(corpus, noisy_oracle, {.folds = 8, .seed = 2, .jobs = 4});
  EXPECT_DOUBLE_EQ(serial.per_syllable, parallel.per_syllable);
  EXPECT_DOUBLE_EQ(serial.per_line, parallel.per_line);
  for (size_t f = 0; f < serial.per_fold.size(); ++f)
    EXPECT_DOUBLE_EQ(serial.per_fold[f].per_syllable, parallel.per_fold[f].per_syllable);
}

TEST(WelchTest, HandDerivedExample) {
  eval::WelchResult r = welch_t_test({1, 2, 3}, {2, 3, 4});
  EXPECT_NEAR(r.t, -1.2247, 1e-4);
  EXPECT_NEAR(r.df, 4.0, 1e-12);
  EXPECT_NEAR(r.p, 0.2878641347266908, 1e-10);
}

TEST(WelchTest, EqualSamplesGiveZeroTUnitP) {
  eval::WelchResult r = welch_t_test({1, 2, 3}, {1, 2, 3});
  EXPECT_DOUBLE_EQ(r.t, 0.0);
  EXPECT_DOUBLE_EQ(r.p, 1.0);
}

TEST(WelchTest, SwapNegatesTExactly) {
  std::vector<double> a = {3.1, 2.9, 4.2, 3.3}, b = {2.0, 2.7, 1.8};
  eval::WelchResult ab = welch_t_test(a, b);
  eval::WelchResult ba = welch_t_test(b, a);
  EXPECT_EQ(ab.t, -ba.t);
  EXPECT_DOUBLE_EQ(ab.df, ba.df);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
}

TEST(WelchTest, DegenerateInputsRejected) {
  EXPECT_THROW(welch_t_test({1.0}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(welch_t_test({2, 2, 2}, {2, 2}), std::invalid_argument);
}

// Two-sided p-values pinned against an external statistics library.
TEST(WelchTest, StudentTSurvivalReferenceValues) {
  EXPECT_NEAR(eval::student_t_two_sided_p(2.5, 7.0), 0.040992218585752874, 1e-10);
  EXPECT_NEAR(eval::student_t_two_sided_p(0.5, 3.2), 0.6494501780131947, 1e-10);
  EXPECT_NEAR(eval::student_t_two_sided_p(-3.7, 12.5), 0.0028423374230941868, 1e-10);
  EXPECT_NEAR(eval::student_t_two_sided_p(10.0, 2.0), 0.009852457023325692, 1e-10);
}

TEST(StatsTest, MonosyllableHistogram) {
  Corpus corpus;
  corpus.language = Language::EN;
  for (int i = 0; i < 3; ++i) {
    Line line;
    line.id = "l" + std::to_string(i);
    Word w;
    w.surface = "the";
    w.syllables = {"the"};
    line.words = {w, w};
    line.gold = {parse_stress_string("--")};
    corpus.lines.push_back(line);
  }
  std::map<int, long> h = eval::syllable_length_stats(corpus);
  EXPECT_EQ(h.size(), 1u);
  EXPECT_EQ(h[1], 6);
}

TEST(StatsTest, BalloonPlusThe) {
  Corpus corpus;
  corpus.language = Language::EN;
  Line line;
  line.id = "l";
  Word the;
  the.surface = "the";
  the.syllables = {"the"};
  Word balloon;
  balloon.surface = "balloon";
  balloon.syllables = {"bal", "loon"};
  line.words = {the, balloon};
  line.gold = {parse_stress_string("--+")};
  corpus.lines.push_back(line);
  std::map<int, long> h = eval::syllable_length_stats(corpus);
  EXPECT_EQ(h[1], 1);
  EXPECT_EQ(h[2], 1);
}

TEST(StatsTest, HistogramTotalEqualsWordCount) {
  Corpus corpus = generate_positional(30, 4, 0.0, 44);
  std::map<int, long> h = eval::syllable_length_stats(corpus);
  long total = 0;
  for (const auto& [k, v] : h) total += v;
  EXPECT_EQ(total, 30 * 4);
}

TEST(StatsTest, CsvFormat) {
  std::map<int, long> h = {{1, 5}, {3, 2}};
  EXPECT_EQ(eval::histogram_csv(h), "syllables,count\n1,5\n3,2\n");
}

}  // namespace
}  // namespace metron
