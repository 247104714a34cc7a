// Generative trigram HMM tagger: deleted-interpolation transition smoothing,
// Witten-Bell emission smoothing, and a character-suffix back-off for unseen
// observations.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "metron/chain.hpp"
#include "metron/encoding.hpp"
#include "metron/utf8.hpp"

namespace metron::hmm {

inline constexpr int kSuffixMaxLen = 4;
inline constexpr long kSuffixFreqThreshold = 10;  // tokens at most this frequent feed suffix stats
inline constexpr double kProbFloor = 1e-12;

struct HmmModel {
  std::vector<std::string> labels;  // sorted; ids are indices
  // ids K and K+1 act as BOS (context only) and EOS (outcome only)
  long n_sequences = 0;
  long n_events = 0;  // label occurrences plus one EOS per sequence

  // raw counts, kept so a deserialized model rebuilds identical tables
  std::map<std::vector<int>, long> trigram;            // (a,b,c) -> count
  std::map<std::pair<int, int>, long> bigram;          // (b,c) -> count
  std::map<std::pair<int, int>, long> context_pair;    // (a,b) as context
  std::vector<long> context_uni;                       // y as context (size K+1, BOS last)
  std::vector<long> event_uni;                         // y as outcome (size K+1, EOS last)

  std::vector<std::unordered_map<std::string, long>> emission_counts;  // per label
  std::vector<long> emission_total;                                    // c(y)
  std::unordered_map<std::string, long> vocab;                         // global obs counts
  std::map<std::pair<std::string, int>, long> suffix_counts;           // (suffix, y)
  long rare_total = 0;

  double lambda1 = 0.0, lambda2 = 0.0, lambda3 = 0.0;

  // derived tables
  std::vector<double> log_trans;  // [(a*(K+1)+b) * (K+1) + c], contexts over K+1 (incl BOS)
  std::vector<double> suffix_p0;  // P(y | rare token), base of the suffix back-off
  double suffix_theta = 1.0;

  int num_labels() const { return static_cast<int>(labels.size()); }
  int bos_id() const { return num_labels(); }
  int eos_id() const { return num_labels(); }  // as outcome index in the K+1 outcome axis

  int label_id(const std::string& label) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) return -1;
    return static_cast<int>(it - labels.begin());
  }

  double log_transition(int a, int b, int c) const {
    int kc = num_labels() + 1;
    return log_trans[(static_cast<size_t>(a) * kc + b) * kc + c];
  }

  // log P(obs | label): Witten-Bell mass for seen pairs, suffix-refined UNK
  // share otherwise.
  double log_emission(const std::string& obs, int y) const {
    double cy = static_cast<double>(emission_total[y]);
    double ty = static_cast<double>(emission_counts[y].size());
    if (cy == 0.0) return std::log(kProbFloor);
    auto it = emission_counts[y].find(obs);
    if (it != emission_counts[y].end())
      return std::log(static_cast<double>(it->second) / (cy + ty));
    double unk_mass = ty / (cy + ty);
    // P(y|suffix)/P(y) reweights the unknown mass toward labels the suffix favors
    double py_given_sfx = suffix_posterior(obs, y);
    double py = std::max(kProbFloor, static_cast<double>(event_uni[y]) /
                                         std::max(1.0, static_cast<double>(n_events - n_sequences)));
    return std::log(std::max(kProbFloor, unk_mass * py_given_sfx / py));
  }

  double suffix_posterior(const std::string& obs, int y) const {
    double p = suffix_p0.empty() ? 1.0 / std::max(1, num_labels()) : suffix_p0[y];
    std::vector<char32_t> cps = utf8::decode(obs);
    for (int len = 1; len <= kSuffixMaxLen && len <= static_cast<int>(cps.size()); ++len) {
      std::string sfx = utf8::encode(
          std::vector<char32_t>(cps.end() - len, cps.end()));
      long total = 0;
      for (int l = 0; l < num_labels(); ++l) {
        auto it = suffix_counts.find({sfx, l});
        if (it != suffix_counts.end()) total += it->second;
      }
      if (total == 0) break;
      auto it = suffix_counts.find({sfx, y});
      double hat = it == suffix_counts.end() ? 0.0
                                             : static_cast<double>(it->second) / total;
      p = (hat + suffix_theta * p) / (1.0 + suffix_theta);
    }
    return std::max(kProbFloor, p);
  }
};

namespace detail {

inline void estimate_lambdas(HmmModel& m) {
  double l1 = 0, l2 = 0, l3 = 0;
  for (const auto& [key, count] : m.trigram) {
    int a = key[0], b = key[1], c = key[2];
    auto ctx2 = m.context_pair.find({a, b});
    double c2ctx = ctx2 == m.context_pair.end() ? 0 : static_cast<double>(ctx2->second);
    auto big = m.bigram.find({b, c});
    double c2 = big == m.bigram.end() ? 0 : static_cast<double>(big->second);
    double c1ctx = static_cast<double>(m.context_uni[b]);
    double c1 = static_cast<double>(m.event_uni[c]);
    double d3 = c2ctx > 1 ? (static_cast<double>(count) - 1.0) / (c2ctx - 1.0) : 0.0;
    double d2 = c1ctx > 1 ? (c2 - 1.0) / (c1ctx - 1.0) : 0.0;
    double d1 = m.n_events > 1 ? (c1 - 1.0) / (static_cast<double>(m.n_events) - 1.0) : 0.0;
    if (d3 >= d2 && d3 >= d1) {
      l3 += static_cast<double>(count);
    } else if (d2 >= d1) {
      l2 += static_cast<double>(count);
    } else {
      l1 += static_cast<double>(count);
    }
  }
  double total = l1 + l2 + l3;
  if (total <= 0) {
    m.lambda1 = m.lambda2 = m.lambda3 = 1.0 / 3.0;
  } else {
    m.lambda1 = l1 / total;
    m.lambda2 = l2 / total;
    m.lambda3 = l3 / total;
  }
}

inline void build_transition_table(HmmModel& m) {
  const int k = m.num_labels();
  const int kc = k + 1;  // contexts include BOS, outcomes include EOS
  m.log_trans.assign(static_cast<size_t>(kc) * kc * kc, std::log(kProbFloor));
  for (int a = 0; a <= k; ++a) {
    for (int b = 0; b <= k; ++b) {
      auto ctx2 = m.context_pair.find({a, b});
      double c2ctx = ctx2 == m.context_pair.end() ? 0 : static_cast<double>(ctx2->second);
      double c1ctx = static_cast<double>(m.context_uni[b]);
      std::vector<double> raw(kc, 0.0);
      double sum = 0.0;
      for (int c = 0; c <= k; ++c) {
        double p3 = 0.0;
        if (c2ctx > 0) {
          auto tri = m.trigram.find({a, b, c});
          if (tri != m.trigram.end()) p3 = static_cast<double>(tri->second) / c2ctx;
        }
        double p2 = 0.0;
        if (c1ctx > 0) {
          auto big = m.bigram.find({b, c});
          if (big != m.bigram.end()) p2 = static_cast<double>(big->second) / c1ctx;
        }
        double p1 = static_cast<double>(m.event_uni[c]) / static_cast<double>(m.n_events);
        raw[c] = m.lambda3 * p3 + m.lambda2 * p2 + m.lambda1 * p1;
        sum += raw[c];
      }
      for (int c = 0; c <= k; ++c) {
        double p = sum > 0 ? raw[c] / sum : 1.0 / kc;
        m.log_trans[(static_cast<size_t>(a) * kc + b) * kc + c] =
            std::log(std::max(kProbFloor, p));
      }
    }
  }
}

inline void build_suffix_base(HmmModel& m) {
  const int k = m.num_labels();
  m.suffix_p0.assign(k, 1.0 / std::max(1, k));
  if (m.rare_total > 0) {
    std::vector<double> counts(k, 0.0);
    double total = 0.0;
    for (int y = 0; y < k; ++y) {
      auto it = m.suffix_counts.find({"", y});
      if (it != m.suffix_counts.end()) {
        counts[y] = static_cast<double>(it->second);
        total += counts[y];
      }
    }
    if (total > 0)
      for (int y = 0; y < k; ++y) m.suffix_p0[y] = std::max(kProbFloor, counts[y] / total);
  }
  if (k >= 2) {
    double mean = 1.0 / k;
    double ss = 0.0;
    for (int y = 0; y < k; ++y) ss += (m.suffix_p0[y] - mean) * (m.suffix_p0[y] - mean);
    m.suffix_theta = std::max(1e-3, std::sqrt(ss / (k - 1)));
  } else {
    m.suffix_theta = 1.0;
  }
}

}  // namespace detail

// Rebuilds the derived tables from counts; called after training and after
// deserialization so both paths share one code path.
inline void finalize_model(HmmModel& m) {
  detail::estimate_lambdas(m);
  detail::build_transition_table(m);
  detail::build_suffix_base(m);
}

inline HmmModel train_hmm(const std::vector<EncodedSequence>& data) {
  if (data.empty()) throw std::invalid_argument("train_hmm: empty training data");

  HmmModel m;
  std::set<std::string> label_set;
  for (const EncodedSequence& seq : data)
    for (const std::string& l : seq.labels) label_set.insert(l);
  m.labels.assign(label_set.begin(), label_set.end());
  const int k = m.num_labels();
  const int bos = k;
  const int eos = k;  // outcome axis: 0..k-1 labels, k = EOS

  m.context_uni.assign(k + 1, 0);
  m.event_uni.assign(k + 1, 0);
  m.emission_counts.resize(k);
  m.emission_total.assign(k, 0);

  for (const EncodedSequence& seq : data) {
    ++m.n_sequences;
    std::vector<int> ids;
    ids.reserve(seq.labels.size());
    for (const std::string& l : seq.labels) ids.push_back(m.label_id(l));

    int a = bos, b = bos;
    ++m.context_uni[bos];  // BOS conditions the first bigram
    for (size_t i = 0; i <= ids.size(); ++i) {
      int c = i < ids.size() ? ids[i] : eos;
      ++m.trigram[{a, b, c}];
      ++m.bigram[std::make_pair(b, c)];
      ++m.context_pair[{a, b}];
      ++m.event_uni[c];
      ++m.n_events;
      if (i < ids.size()) ++m.context_uni[c];
      a = b;
      b = c;
    }

    for (size_t i = 0; i < ids.size(); ++i) {
      ++m.emission_counts[ids[i]][seq.observations[i]];
      ++m.emission_total[ids[i]];
      ++m.vocab[seq.observations[i]];
    }
  }

  // Suffix statistics over infrequent tokens, the TnT unknown-word recipe.
  for (const EncodedSequence& seq : data) {
    for (size_t i = 0; i < seq.observations.size(); ++i) {
      const std::string& obs = seq.observations[i];
      if (m.vocab[obs] > kSuffixFreqThreshold) continue;
      int y = m.label_id(seq.labels[i]);
      ++m.rare_total;
      ++m.suffix_counts[{"", y}];
      std::vector<char32_t> cps = utf8::decode(obs);
      for (int len = 1; len <= kSuffixMaxLen && len <= static_cast<int>(cps.size()); ++len)
        ++m.suffix_counts[{utf8::encode(std::vector<char32_t>(cps.end() - len, cps.end())), y}];
    }
  }

  finalize_model(m);
  return m;
}

// Trigram Viterbi over pair states; ties go to the lexicographically smaller
// label-id sequence.
inline std::vector<int> viterbi_ids(const HmmModel& m, const std::vector<std::string>& observations) {
  if (observations.empty()) throw std::invalid_argument("viterbi: empty observation sequence");
  const int k = m.num_labels();
  const int bos = k;
  const int eos = k;
  const int n = static_cast<int>(observations.size());

  struct Cell {
    double score = chain::kNegInf;
    std::vector<int> path;
  };
  // state = (prev_prev, prev); prev_prev may be BOS
  auto idx = [k](int a, int b) { return static_cast<size_t>(a) * k + b; };

  std::vector<Cell> cur(static_cast<size_t>(k + 1) * k);
  for (int y = 0; y < k; ++y) {
    Cell& cell = cur[idx(bos, y)];
    cell.score = m.log_transition(bos, bos, y) + m.log_emission(observations[0], y);
    cell.path = {y};
  }

  for (int i = 1; i < n; ++i) {
    std::vector<Cell> next(static_cast<size_t>(k + 1) * k);
    for (int b = 0; b < k; ++b) {
      double emit = m.log_emission(observations[i], b);
      for (int a = 0; a < k; ++a) {
        Cell& target = next[idx(a, b)];
        for (int p = 0; p <= k; ++p) {  // p may be BOS only when i == 1
          const Cell& prev = cur[idx(p, a)];
          if (prev.score == chain::kNegInf) continue;
          double cand = prev.score + m.log_transition(p, a, b) + emit;
          if (cand > target.score ||
              (cand == target.score && !target.path.empty() && prev.path < target.path)) {
            target.score = cand;
            target.path = prev.path;
            target.path.push_back(b);
          }
        }
      }
    }
    cur = std::move(next);
  }

  const Cell* best = nullptr;
  double best_score = chain::kNegInf;
  for (int a = 0; a <= k; ++a) {
    for (int b = 0; b < k; ++b) {
      const Cell& cell = cur[idx(a, b)];
      if (cell.score == chain::kNegInf) continue;
      double cand = cell.score + m.log_transition(a, b, eos);
      if (best == nullptr || cand > best_score ||
          (cand == best_score && cell.path < best->path)) {
        best = &cell;
        best_score = cand;
      }
    }
  }
  return best->path;
}

inline std::vector<std::string> viterbi(const HmmModel& m,
                                        const std::vector<std::string>& observations) {
  std::vector<int> ids = viterbi_ids(m, observations);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(m.labels[id]);
  return out;
}

// Joint log-probability of (observations, label ids) under the model,
// including the BOS prefix and EOS close. The brute-force test oracle sums
// these over all label sequences.
inline double sequence_log_prob(const HmmModel& m, const std::vector<std::string>& observations,
                                const std::vector<int>& ids) {
  const int bos = m.num_labels();
  int a = bos, b = bos;
  double lp = 0.0;
  for (size_t i = 0; i < ids.size(); ++i) {
    lp += m.log_transition(a, b, ids[i]) + m.log_emission(observations[i], ids[i]);
    a = b;
    b = ids[i];
  }
  return lp + m.log_transition(a, b, m.num_labels());
}

}  // namespace metron::hmm
