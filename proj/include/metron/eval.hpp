// Levenshtein-based scoring, per-line accuracy, Welch's t-test, and corpus
// statistics.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "metron/corpus.hpp"

namespace metron::eval {

// Unit-cost edit distance.
template <typename Seq>
int levenshtein(const Seq& a, const Seq& b) {
  const size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

struct LineScore {
  int errors = 0;   // min Levenshtein distance over the references
  int ref_len = 0;  // length of the minimizing reference (ties -> longest)
  int pred_len = 0;
  bool exact = false;
};

inline LineScore score_line(const StressSeq& pred, const std::vector<StressSeq>& gold_refs) {
  if (gold_refs.empty()) throw std::invalid_argument("score_line: no gold references");
  LineScore score;
  score.pred_len = static_cast<int>(pred.size());
  score.errors = -1;
  for (const StressSeq& ref : gold_refs) {
    int d = levenshtein(pred, ref);
    int len = static_cast<int>(ref.size());
    if (score.errors < 0 || d < score.errors || (d == score.errors && len > score.ref_len)) {
      score.errors = d;
      score.ref_len = len;
    }
  }
  score.exact = score.errors == 0;
  return score;
}

struct FoldScore {
  int fold = 0;
  double per_syllable = 0.0;
  double per_line = 0.0;
};

struct EvalReport {
  double per_syllable = 0.0;  // percentages in [0, 100]
  double per_line = 0.0;
  long total_syllables = 0;   // sum of max(|pred|, ref_len)
  long total_lines = 0;
  std::vector<FoldScore> per_fold;
};

// per_syllable = 100 * (1 - sum(errors) / sum(max(|pred|, ref_len)));
// per_line = 100 * exact / lines.
inline EvalReport aggregate(const std::vector<LineScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("aggregate: no line scores");
  EvalReport report;
  long errors = 0;
  long denom = 0;
  long exact = 0;
  for (const LineScore& s : scores) {
    errors += s.errors;
    denom += std::max(s.pred_len, s.ref_len);
    exact += s.exact ? 1 : 0;
  }
  report.total_syllables = denom;
  report.total_lines = static_cast<long>(scores.size());
  report.per_syllable = 100.0 * (1.0 - static_cast<double>(errors) / static_cast<double>(denom));
  report.per_line = 100.0 * static_cast<double>(exact) / static_cast<double>(scores.size());
  return report;
}

namespace detail {

// Regularized incomplete beta via the Lentz continued fraction.
inline double betacf(double a, double b, double x) {
  const int max_iter = 300;
  const double eps = 1e-15, tiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log(1.0 - x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p for the t statistic with the given degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
  return detail::incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

inline WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: each sample needs at least two values");
  auto mean_var = [](const std::vector<double>& x) {
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair<double, double>(mean, ss / static_cast<double>(x.size() - 1));
  };
  auto [ma, va] = mean_var(a);
  auto [mb, vb] = mean_var(b);
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  double se2 = va / na + vb / nb;
  if (se2 <= 0.0)
    throw std::invalid_argument("welch_t_test: degenerate (zero) combined variance");

  WelchResult r;
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

// Histogram of syllables-per-word over the whole corpus.
inline std::map<int, long> syllable_length_stats(const Corpus& corpus) {
  std::map<int, long> histogram;
  for (const Line& line : corpus.lines)
    for (const Word& w : line.words) ++histogram[w.syllable_count()];
  return histogram;
}

inline std::string histogram_csv(const std::map<int, long>& histogram) {
  std::string out = "syllables,count\n";
  for (const auto& [k, v] : histogram)
    out += std::to_string(k) + "," + std::to_string(v) + "\n";
  return out;
}

}  // namespace metron::eval
