// Averaged perceptron sequence tagger: greedy left-to-right decoding with the
// previous one and two predicted labels as dynamic features.
#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "metron/features.hpp"

namespace metron::perceptron {

struct PerceptronConfig {
  int epochs = 10;
  uint64_t seed = 1;
};

struct PerceptronModel {
  std::vector<std::string> labels;  // sorted; argmax ties go to the smaller index
  features::FeatureAlphabet alphabet;
  features::FeatureSet feature_set = features::FeatureSet::Basic10;
  std::vector<std::vector<double>> averaged;  // [label][feature]

  int num_labels() const { return static_cast<int>(labels.size()); }
};

namespace detail {

inline constexpr const char* kPadLabel = "<B>";

inline std::string prev1_feature(const std::string& l1) { return "dyn.py1=" + l1; }

inline std::string prev2_feature(const std::string& l2, const std::string& l1) {
  return "dyn.py2=" + l2 + "|" + l1;
}

inline double score_of(const std::vector<double>& w, const std::vector<uint32_t>& feats) {
  double s = 0.0;
  for (uint32_t f : feats)
    if (f < w.size()) s += w[f];
  return s;
}

inline int argmax_label(const std::vector<std::vector<double>>& weights,
                        const std::vector<uint32_t>& feats) {
  int best = 0;
  double best_score = score_of(weights[0], feats);
  for (size_t y = 1; y < weights.size(); ++y) {
    double s = score_of(weights[y], feats);
    if (s > best_score) {
      best_score = s;
      best = static_cast<int>(y);
    }
  }
  return best;
}

}  // namespace detail

inline PerceptronModel train_perceptron(const std::vector<features::FeaturizedSequence>& data,
                                        features::FeatureAlphabet alphabet,
                                        features::FeatureSet feature_set,
                                        const PerceptronConfig& config) {
  if (data.empty()) throw std::invalid_argument("train_perceptron: empty training data");
  if (config.epochs < 1) throw std::invalid_argument("train_perceptron: epochs must be >= 1");

  PerceptronModel model;
  model.feature_set = feature_set;
  std::set<std::string> label_set;
  for (const auto& item : data)
    for (const std::string& l : item.seq.labels) label_set.insert(l);
  model.labels.assign(label_set.begin(), label_set.end());
  const int k = model.num_labels();

  std::vector<std::vector<double>> w(k), totals(k);
  auto ensure = [&](uint32_t f) {
    if (f >= w[0].size())
      for (int y = 0; y < k; ++y) {
        w[y].resize(f + 1, 0.0);
        totals[y].resize(f + 1, 0.0);
      }
  };

  auto label_id = [&](const std::string& l) {
    return static_cast<int>(std::lower_bound(model.labels.begin(), model.labels.end(), l) -
                            model.labels.begin());
  };

  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed);

  double t = 1.0;  // update clock for averaging
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t idx : order) {
      const auto& item = data[idx];
      std::string prev1 = detail::kPadLabel, prev2 = detail::kPadLabel;
      for (size_t i = 0; i < item.seq.size(); ++i) {
        std::vector<uint32_t> feats = item.feats[i].indices;
        feats.push_back(alphabet.lookup(detail::prev1_feature(prev1)));
        feats.push_back(alphabet.lookup(detail::prev2_feature(prev2, prev1)));
        for (uint32_t f : feats) ensure(f);

        int pred = detail::argmax_label(w, feats);
        int gold = label_id(item.seq.labels[i]);
        if (pred != gold) {
          for (uint32_t f : feats) {
            w[gold][f] += 1.0;
            totals[gold][f] += t;
            w[pred][f] -= 1.0;
            totals[pred][f] -= t;
          }
        }
        t += 1.0;
        prev2 = prev1;
        prev1 = model.labels[pred];
      }
    }
  }

  alphabet.freeze();
  model.alphabet = std::move(alphabet);
  model.averaged.assign(k, std::vector<double>(model.alphabet.size(), 0.0));
  for (int y = 0; y < k; ++y)
    for (size_t f = 0; f < w[y].size(); ++f)
      model.averaged[y][f] = w[y][f] - totals[y][f] / t;
  return model;
}

// Greedy argmax per position under the averaged weights.
inline std::vector<std::string> predict_perceptron(const PerceptronModel& model,
                                                   const std::vector<features::FeatureVector>& feats) {
  std::vector<std::string> out;
  out.reserve(feats.size());
  std::string prev1 = detail::kPadLabel, prev2 = detail::kPadLabel;
  // unseen dynamic features resolve to UNK, whose weight is 0
  for (const features::FeatureVector& fv : feats) {
    std::vector<uint32_t> ids = fv.indices;
    ids.push_back(model.alphabet.lookup_or_unk(detail::prev1_feature(prev1)));
    ids.push_back(model.alphabet.lookup_or_unk(detail::prev2_feature(prev2, prev1)));
    int pred = detail::argmax_label(model.averaged, ids);
    prev2 = prev1;
    prev1 = model.labels[pred];
    out.push_back(prev1);
  }
  return out;
}

}  // namespace metron::perceptron
