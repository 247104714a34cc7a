// Seeded k-fold cross-validation over a corpus, generic in the model family:
// a trainer maps a training slice to a predictor.
#pragma once

#include <atomic>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "metron/corpus.hpp"
#include "metron/eval.hpp"

namespace metron::eval {

using Predictor = std::function<StressSeq(const Line&)>;
using Trainer = std::function<Predictor(const std::vector<Line>&, uint64_t fold_seed)>;

struct FoldPlan {
  // fold id -> line indices held out for evaluation
  std::vector<std::vector<size_t>> folds;
};

// Deterministic seeded shuffle, then contiguous near-equal slices
// (sizes differ by at most one).
inline FoldPlan make_folds(size_t n_lines, int folds, uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (n_lines < static_cast<size_t>(folds))
    throw std::invalid_argument("corpus too small for " + std::to_string(folds) + " folds");
  std::vector<size_t> order(n_lines);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldPlan plan;
  plan.folds.resize(folds);
  size_t base = n_lines / folds;
  size_t extra = n_lines % folds;
  size_t at = 0;
  for (int f = 0; f < folds; ++f) {
    size_t len = base + (static_cast<size_t>(f) < extra ? 1 : 0);
    plan.folds[f].assign(order.begin() + at, order.begin() + at + len);
    at += len;
  }
  return plan;
}

struct CvOptions {
  int folds = 10;
  uint64_t seed = 1;
  int jobs = 0;  // 0 -> hardware concurrency
};

inline EvalReport cross_validate(const Corpus& corpus, const Trainer& trainer,
                                 const CvOptions& options = {}) {
  FoldPlan plan = make_folds(corpus.lines.size(), options.folds, options.seed);

  auto run_fold = [&](int f) {
    std::vector<char> held(corpus.lines.size(), 0);
    for (size_t idx : plan.folds[f]) held[idx] = 1;
    std::vector<Line> train;
    train.reserve(corpus.lines.size() - plan.folds[f].size());
    for (size_t i = 0; i < corpus.lines.size(); ++i)
      if (!held[i]) train.push_back(corpus.lines[i]);

    uint64_t fold_seed = options.seed * 0x9E3779B97F4A7C15ULL + static_cast<uint64_t>(f) + 1;
    Predictor predict = trainer(train, fold_seed);

    std::vector<LineScore> scores;
    scores.reserve(plan.folds[f].size());
    for (size_t idx : plan.folds[f]) {
      const Line& line = corpus.lines[idx];
      scores.push_back(score_line(predict(line), line.gold));
    }
    return scores;
  };

  int jobs = options.jobs > 0 ? options.jobs
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::vector<LineScore>> fold_scores(options.folds);
  if (jobs <= 1) {
    for (int f = 0; f < options.folds; ++f) fold_scores[f] = run_fold(f);
  } else {
    std::vector<std::thread> workers;
    std::atomic<int> counter{0};
    auto work = [&]() {
      while (true) {
        int f = counter.fetch_add(1);
        if (f >= options.folds) break;
        fold_scores[f] = run_fold(f);
      }
    };
    for (int t = 0; t < std::min(jobs, options.folds); ++t) workers.emplace_back(work);
    for (std::thread& t : workers) t.join();
  }

  std::vector<LineScore> pooled;
  EvalReport report;
  for (int f = 0; f < options.folds; ++f) {
    EvalReport fold_report = aggregate(fold_scores[f]);
    report.per_fold.push_back({f, fold_report.per_syllable, fold_report.per_line});
    pooled.insert(pooled.end(), fold_scores[f].begin(), fold_scores[f].end());
  }
  EvalReport pooled_report = aggregate(pooled);
  report.per_syllable = pooled_report.per_syllable;
  report.per_line = pooled_report.per_line;
  report.total_syllables = pooled_report.total_syllables;
  report.total_lines = pooled_report.total_lines;
  return report;
}

}  // namespace metron::eval
