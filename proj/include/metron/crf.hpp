// Linear-chain CRF over template features: exact log-space forward-backward
// gradients, AdaGrad SGD training, and Viterbi decoding.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "metron/chain.hpp"
#include "metron/features.hpp"

namespace metron::crf {

struct CrfConfig {
  double sigma2 = 1.0;  // L2 regularizer
  double lr = 0.1;
  int epochs = 50;
  uint64_t seed = 1;
};

// Parameters live in one flat vector: unary weights [feature x label], then
// transitions [label x label], then BOS and EOS vectors.
struct CrfModel {
  std::vector<std::string> labels;  // sorted
  features::FeatureAlphabet alphabet;
  features::FeatureSet feature_set = features::FeatureSet::Basic10;
  double sigma2 = 1.0;
  std::vector<double> params;

  int num_labels() const { return static_cast<int>(labels.size()); }
  size_t num_features() const { return alphabet.size(); }

  size_t trans_offset() const { return num_features() * num_labels(); }
  size_t bos_offset() const { return trans_offset() + static_cast<size_t>(num_labels()) * num_labels(); }
  size_t eos_offset() const { return bos_offset() + num_labels(); }
  size_t param_count() const { return eos_offset() + num_labels(); }

  double unary(uint32_t f, int y) const { return params[static_cast<size_t>(f) * num_labels() + y]; }
  double trans(int a, int b) const {
    return params[trans_offset() + static_cast<size_t>(a) * num_labels() + b];
  }

  int label_id(const std::string& l) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), l);
    return static_cast<int>(it - labels.begin());
  }

  static CrfModel create(std::vector<std::string> sorted_labels, features::FeatureAlphabet alphabet,
                         features::FeatureSet feature_set, double sigma2) {
    CrfModel m;
    m.labels = std::move(sorted_labels);
    m.alphabet = std::move(alphabet);
    m.alphabet.freeze();
    m.feature_set = feature_set;
    m.sigma2 = sigma2;
    m.params.assign(m.param_count(), 0.0);
    return m;
  }
};

inline chain::Lattice build_lattice(const CrfModel& m, const features::FeaturizedSequence& item) {
  const int n = static_cast<int>(item.seq.size());
  const int k = m.num_labels();
  chain::Lattice lat(n, k);
  for (int i = 0; i < n; ++i)
    for (uint32_t f : item.feats[i].indices)
      for (int y = 0; y < k; ++y) lat.u(i, y) += m.unary(f, y);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) lat.t(a, b) = m.trans(a, b);
  for (int y = 0; y < k; ++y) {
    lat.bos[y] = m.params[m.bos_offset() + y];
    lat.eos[y] = m.params[m.eos_offset() + y];
  }
  return lat;
}

// L2-penalized conditional log-likelihood of the batch and its exact dense
// gradient (empirical minus expected feature counts, minus w / sigma^2).
inline std::pair<double, std::vector<double>> crf_log_likelihood_and_gradient(
    const CrfModel& m, const std::vector<features::FeaturizedSequence>& batch) {
  const int k = m.num_labels();
  double ll = 0.0;
  std::vector<double> grad(m.param_count(), 0.0);

  for (const auto& item : batch) {
    const int n = static_cast<int>(item.seq.size());
    chain::Lattice lat = build_lattice(m, item);
    chain::Posteriors post = chain::posteriors(lat);

    std::vector<int> gold(n);
    for (int i = 0; i < n; ++i) gold[i] = m.label_id(item.seq.labels[i]);

    double seq_ll = chain::score_path(lat, gold) - post.log_z;
    if (!std::isfinite(seq_ll))
      throw std::runtime_error("crf: non-finite log-likelihood on sequence '" + item.seq.origin + "'");
    ll += seq_ll;

    for (int i = 0; i < n; ++i) {
      for (uint32_t f : item.feats[i].indices) {
        size_t base = static_cast<size_t>(f) * k;
        grad[base + gold[i]] += 1.0;
        for (int y = 0; y < k; ++y) grad[base + y] -= post.gamma[static_cast<size_t>(i) * k + y];
      }
    }
    for (int i = 0; i + 1 < n; ++i) {
      grad[m.trans_offset() + static_cast<size_t>(gold[i]) * k + gold[i + 1]] += 1.0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          grad[m.trans_offset() + static_cast<size_t>(a) * k + b] -=
              post.xi[(static_cast<size_t>(i) * k + a) * k + b];
    }
    grad[m.bos_offset() + gold[0]] += 1.0;
    grad[m.eos_offset() + gold[n - 1]] += 1.0;
    for (int y = 0; y < k; ++y) {
      grad[m.bos_offset() + y] -= post.gamma[y];
      grad[m.eos_offset() + y] -= post.gamma[static_cast<size_t>(n - 1) * k + y];
    }
  }

  for (size_t i = 0; i < m.params.size(); ++i) {
    ll -= m.params[i] * m.params[i] / (2.0 * m.sigma2);
    grad[i] -= m.params[i] / m.sigma2;
  }
  return {ll, std::move(grad)};
}

// AdaGrad SGD on per-sequence gradients. The L2 penalty is applied lazily to
// the coordinates each step touches, scaled by 1/N.
inline CrfModel train_crf(const std::vector<features::FeaturizedSequence>& data,
                          std::vector<std::string> sorted_labels,
                          features::FeatureAlphabet alphabet, features::FeatureSet feature_set,
                          const CrfConfig& config) {
  if (data.empty()) throw std::invalid_argument("train_crf: empty training data");
  CrfModel m = CrfModel::create(std::move(sorted_labels), std::move(alphabet), feature_set,
                                config.sigma2);
  const int k = m.num_labels();
  const double n_seq = static_cast<double>(data.size());

  std::vector<double> accum(m.param_count(), 0.0);  // AdaGrad sum of squares
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed);

  std::vector<double> gu;  // gradient block for the features active in one sequence
  const double eps = 1e-8;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double objective = 0.0;
    for (size_t idx : order) {
      const auto& item = data[idx];
      const int n = static_cast<int>(item.seq.size());

      chain::Lattice lat = build_lattice(m, item);
      chain::Posteriors post = chain::posteriors(lat);
      std::vector<int> gold(n);
      for (int i = 0; i < n; ++i) gold[i] = m.label_id(item.seq.labels[i]);
      double seq_ll = chain::score_path(lat, gold) - post.log_z;
      objective += seq_ll;
      if (!std::isfinite(seq_ll))
        throw std::runtime_error("crf training diverged on sequence '" + item.seq.origin + "'");

      std::vector<uint32_t> active;
      for (int i = 0; i < n; ++i)
        active.insert(active.end(), item.feats[i].indices.begin(), item.feats[i].indices.end());
      std::sort(active.begin(), active.end());
      active.erase(std::unique(active.begin(), active.end()), active.end());

      gu.assign(active.size() * k, 0.0);
      auto active_slot = [&](uint32_t f) {
        return static_cast<size_t>(
            std::lower_bound(active.begin(), active.end(), f) - active.begin());
      };
      for (int i = 0; i < n; ++i) {
        for (uint32_t f : item.feats[i].indices) {
          size_t base = active_slot(f) * k;
          gu[base + gold[i]] += 1.0;
          for (int y = 0; y < k; ++y) gu[base + y] -= post.gamma[static_cast<size_t>(i) * k + y];
        }
      }

      auto adagrad_step = [&](size_t pidx, double g) {
        g -= m.params[pidx] / (m.sigma2 * n_seq);
        accum[pidx] += g * g;
        m.params[pidx] += config.lr * g / (std::sqrt(accum[pidx]) + eps);
      };

      for (size_t s = 0; s < active.size(); ++s) {
        size_t pbase = static_cast<size_t>(active[s]) * k;
        for (int y = 0; y < k; ++y) adagrad_step(pbase + y, gu[s * k + y]);
      }
      std::vector<double> gt(static_cast<size_t>(k) * k, 0.0);
      for (int i = 0; i + 1 < n; ++i) {
        gt[static_cast<size_t>(gold[i]) * k + gold[i + 1]] += 1.0;
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b)
            gt[static_cast<size_t>(a) * k + b] -= post.xi[(static_cast<size_t>(i) * k + a) * k + b];
      }
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          adagrad_step(m.trans_offset() + static_cast<size_t>(a) * k + b,
                       gt[static_cast<size_t>(a) * k + b]);
      for (int y = 0; y < k; ++y) {
        double gb = (gold[0] == y ? 1.0 : 0.0) - post.gamma[y];
        double ge = (gold[n - 1] == y ? 1.0 : 0.0) -
                    post.gamma[static_cast<size_t>(n - 1) * k + y];
        adagrad_step(m.bos_offset() + y, gb);
        adagrad_step(m.eos_offset() + y, ge);
      }
    }
    if (!std::isfinite(objective))
      throw std::runtime_error("crf training diverged (non-finite objective)");
  }
  return m;
}

inline std::vector<std::string> crf_viterbi(const CrfModel& m,
                                            const features::FeaturizedSequence& item) {
  chain::Lattice lat = build_lattice(m, item);
  std::vector<int> path = chain::viterbi(lat);
  std::vector<std::string> out;
  out.reserve(path.size());
  for (int y : path) out.push_back(m.labels[y]);
  return out;
}

}  // namespace metron::crf
