// Character-BiLSTM word encoder + jointly trained token embeddings + a
// token-level BiLSTM with a CRF output layer, trained by SGD with global-norm
// gradient clipping.
#pragma once

#include <algorithm>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "metron/chain.hpp"
#include "metron/encoding.hpp"
#include "metron/eval.hpp"
#include "metron/tensor.hpp"
#include "metron/utf8.hpp"

namespace metron::neural {

struct NeuralConfig {
  int char_dim = 25;
  int char_hidden = 25;
  int token_dim = 50;
  int token_hidden = 100;
  double dropout = 0.5;
  double lr = 0.01;
  double grad_clip = 5.0;
  int epochs = 30;
  int batch_size = 1;
  uint64_t seed = 1;
  std::string pretrained_embeddings;  // optional "token v1 ... vd" text file
};

inline constexpr int kUnkId = 0;

struct BilstmCrfModel {
  NeuralConfig config;
  std::vector<std::string> labels;  // sorted
  std::unordered_map<std::string, int> char_vocab;   // codepoint -> id, <UNK> = 0
  std::unordered_map<std::string, int> token_vocab;  // token -> id, <UNK> = 0

  autodiff::Tensor char_emb;
  autodiff::LstmParams char_fwd, char_bwd;
  autodiff::Tensor token_emb;
  autodiff::LstmParams token_fwd, token_bwd;
  autodiff::Tensor proj_w, proj_b;
  autodiff::Tensor crf_trans, crf_bos, crf_eos;

  int num_labels() const { return static_cast<int>(labels.size()); }
  int token_repr_dim() const { return 2 * config.char_hidden + config.token_dim; }

  int label_id(const std::string& l) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), l);
    return static_cast<int>(it - labels.begin());
  }

  std::vector<autodiff::Tensor*> parameters() {
    return {&char_emb,     &char_fwd.w,  &char_fwd.u,  &char_fwd.b, &char_bwd.w,
            &char_bwd.u,   &char_bwd.b,  &token_emb,   &token_fwd.w, &token_fwd.u,
            &token_fwd.b,  &token_bwd.w, &token_bwd.u, &token_bwd.b, &proj_w,
            &proj_b,       &crf_trans,   &crf_bos,     &crf_eos};
  }

  std::vector<const autodiff::Tensor*> parameters() const {
    auto ps = const_cast<BilstmCrfModel*>(this)->parameters();
    return {ps.begin(), ps.end()};
  }

  void zero_grads() {
    for (autodiff::Tensor* t : parameters()) t->zero_grad();
  }
};

namespace detail {

inline void glorot_init(autodiff::Tensor& t, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / (t.rows + t.cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.v) v = dist(rng);
}

inline void embedding_init(autodiff::Tensor& t, std::mt19937_64& rng) {
  double limit = std::sqrt(3.0 / t.cols);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.v) v = dist(rng);
}

inline void init_lstm(autodiff::LstmParams& p, std::mt19937_64& rng) {
  glorot_init(p.w, rng);
  glorot_init(p.u, rng);
  // biases start at zero
}

inline void load_pretrained(autodiff::Tensor& token_emb,
                            const std::unordered_map<std::string, int>& vocab,
                            const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open pretrained embeddings: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> values;
    double v;
    while (ss >> v) values.push_back(v);
    if (static_cast<int>(values.size()) != dim)
      throw std::invalid_argument("pretrained embeddings line " + std::to_string(lineno) + ": got " +
                                  std::to_string(values.size()) + " dims, expected " +
                                  std::to_string(dim));
    auto it = vocab.find(token);
    if (it == vocab.end()) continue;
    for (int c = 0; c < dim; ++c) token_emb.at(it->second, c) = values[c];
  }
}

}  // namespace detail

// Builds an initialized (untrained) model from the training vocabulary.
inline BilstmCrfModel build_model(const std::vector<EncodedSequence>& data,
                                  const NeuralConfig& config) {
  BilstmCrfModel m;
  m.config = config;

  std::set<std::string> label_set;
  std::set<std::string> token_set;
  std::set<std::string> char_set;
  for (const EncodedSequence& seq : data) {
    for (const std::string& l : seq.labels) label_set.insert(l);
    for (const std::string& o : seq.observations) {
      token_set.insert(o);
      for (char32_t cp : utf8::decode(o)) char_set.insert(utf8::encode(cp));
    }
  }
  m.labels.assign(label_set.begin(), label_set.end());

  m.char_vocab["<UNK>"] = kUnkId;
  for (const std::string& c : char_set)
    m.char_vocab.emplace(c, static_cast<int>(m.char_vocab.size()));
  m.token_vocab["<UNK>"] = kUnkId;
  for (const std::string& t : token_set)
    m.token_vocab.emplace(t, static_cast<int>(m.token_vocab.size()));

  const int k = m.num_labels();
  m.char_emb = autodiff::Tensor(static_cast<int>(m.char_vocab.size()), config.char_dim);
  m.char_fwd = autodiff::LstmParams(config.char_dim, config.char_hidden);
  m.char_bwd = autodiff::LstmParams(config.char_dim, config.char_hidden);
  m.token_emb = autodiff::Tensor(static_cast<int>(m.token_vocab.size()), config.token_dim);
  m.token_fwd = autodiff::LstmParams(m.token_repr_dim(), config.token_hidden);
  m.token_bwd = autodiff::LstmParams(m.token_repr_dim(), config.token_hidden);
  m.proj_w = autodiff::Tensor(k, 2 * config.token_hidden);
  m.proj_b = autodiff::Tensor(k, 1);
  m.crf_trans = autodiff::Tensor(k, k);
  m.crf_bos = autodiff::Tensor(k, 1);
  m.crf_eos = autodiff::Tensor(k, 1);

  std::mt19937_64 rng(config.seed);
  detail::embedding_init(m.char_emb, rng);
  detail::init_lstm(m.char_fwd, rng);
  detail::init_lstm(m.char_bwd, rng);
  detail::embedding_init(m.token_emb, rng);
  detail::init_lstm(m.token_fwd, rng);
  detail::init_lstm(m.token_bwd, rng);
  detail::glorot_init(m.proj_w, rng);
  // proj_b and the CRF factors start at zero

  if (!config.pretrained_embeddings.empty())
    detail::load_pretrained(m.token_emb, m.token_vocab, config.pretrained_embeddings,
                            config.token_dim);
  return m;
}

// [char-forward final state; char-backward final state; token embedding]
inline int encode_token(autodiff::Tape& tape, BilstmCrfModel& m, const std::string& token) {
  if (token.empty()) throw std::invalid_argument("encode_token: empty token");
  std::vector<int> char_inputs;
  for (char32_t cp : utf8::decode(token)) {
    auto it = m.char_vocab.find(utf8::encode(cp));
    int id = it == m.char_vocab.end() ? kUnkId : it->second;
    char_inputs.push_back(tape.row(&m.char_emb, id));
  }
  int fwd = autodiff::lstm_final_state(tape, m.char_fwd, char_inputs);
  std::reverse(char_inputs.begin(), char_inputs.end());
  int bwd = autodiff::lstm_final_state(tape, m.char_bwd, char_inputs);

  auto it = m.token_vocab.find(token);
  int tok_id = it == m.token_vocab.end() ? kUnkId : it->second;
  int emb = tape.row(&m.token_emb, tok_id);
  return tape.concat({fwd, bwd, emb});
}

// Per-position label score nodes (the pre-CRF lattice). Inverted dropout on
// the token representations when train_mode is set.
inline std::vector<int> forward_sequence(autodiff::Tape& tape, BilstmCrfModel& m,
                                         const std::vector<std::string>& observations,
                                         bool train_mode, std::mt19937_64& rng) {
  if (observations.empty()) throw std::invalid_argument("forward_sequence: empty input");
  std::vector<int> reprs;
  reprs.reserve(observations.size());
  for (const std::string& obs : observations) {
    int r = encode_token(tape, m, obs);
    if (train_mode && m.config.dropout > 0.0) {
      double keep = 1.0 - m.config.dropout;
      std::bernoulli_distribution coin(keep);
      std::vector<double> mask(m.token_repr_dim());
      for (double& v : mask) v = coin(rng) ? 1.0 / keep : 0.0;
      r = tape.mul_const(r, std::move(mask));
    }
    reprs.push_back(r);
  }

  std::vector<int> fwd = autodiff::lstm_all_states(tape, m.token_fwd, reprs);
  std::vector<int> rev_inputs(reprs.rbegin(), reprs.rend());
  std::vector<int> bwd = autodiff::lstm_all_states(tape, m.token_bwd, rev_inputs);
  std::reverse(bwd.begin(), bwd.end());

  std::vector<int> scores;
  scores.reserve(observations.size());
  for (size_t i = 0; i < observations.size(); ++i) {
    int h = tape.concat({fwd[i], bwd[i]});
    scores.push_back(tape.add_param(tape.matvec(&m.proj_w, h), &m.proj_b));
  }
  return scores;
}

// Summed CRF negative log-likelihood over the batch; gradients accumulate
// into the model's parameter tensors.
inline double neural_loss_and_gradients(BilstmCrfModel& m,
                                        const std::vector<EncodedSequence>& batch, bool train_mode,
                                        uint64_t dropout_seed) {
  if (batch.empty()) throw std::invalid_argument("neural_loss_and_gradients: empty batch");
  std::mt19937_64 rng(dropout_seed);
  double total = 0.0;
  for (const EncodedSequence& seq : batch) {
    autodiff::Tape tape;
    std::vector<int> scores = forward_sequence(tape, m, seq.observations, train_mode, rng);
    std::vector<int> gold(seq.size());
    for (size_t i = 0; i < seq.size(); ++i) gold[i] = m.label_id(seq.labels[i]);
    int nll = tape.chain_crf_nll(scores, &m.crf_trans, &m.crf_bos, &m.crf_eos, gold);
    double loss = tape.scalar(nll);
    if (!std::isfinite(loss))
      throw std::runtime_error("neural: non-finite loss on sequence '" + seq.origin + "'");
    tape.backward(nll);
    total += loss;
  }
  return total;
}

// Clips the global gradient norm to the configured bound; returns the
// pre-clip norm.
inline double clip_gradients(BilstmCrfModel& m) {
  double sq = 0.0;
  for (autodiff::Tensor* t : m.parameters())
    for (double g : t->g) sq += g * g;
  double norm = std::sqrt(sq);
  if (norm > m.config.grad_clip && norm > 0.0) {
    double scale = m.config.grad_clip / norm;
    for (autodiff::Tensor* t : m.parameters())
      for (double& g : t->g) g *= scale;
  }
  return norm;
}

inline std::vector<std::string> neural_predict(BilstmCrfModel& m,
                                               const std::vector<std::string>& observations) {
  autodiff::Tape tape;
  std::mt19937_64 rng(0);
  std::vector<int> scores = forward_sequence(tape, m, observations, /*train_mode=*/false, rng);
  const int k = m.num_labels();
  chain::Lattice lat(static_cast<int>(observations.size()), k);
  for (size_t i = 0; i < observations.size(); ++i)
    for (int y = 0; y < k; ++y) lat.u(static_cast<int>(i), y) = tape.value(scores[i])[y];
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) lat.t(a, b) = m.crf_trans.at(a, b);
  for (int y = 0; y < k; ++y) {
    lat.bos[y] = m.crf_bos.v[y];
    lat.eos[y] = m.crf_eos.v[y];
  }
  std::vector<int> path = chain::viterbi(lat);
  std::vector<std::string> out;
  out.reserve(path.size());
  for (int y : path) out.push_back(m.labels[y]);
  return out;
}

// Pre-CRF score lattice as CSV: one row per position, one column per label.
inline void dump_activations(BilstmCrfModel& m, const std::vector<std::string>& observations,
                             std::ostream& out) {
  autodiff::Tape tape;
  std::mt19937_64 rng(0);
  std::vector<int> scores = forward_sequence(tape, m, observations, /*train_mode=*/false, rng);
  out << "position";
  for (const std::string& l : m.labels) out << ',' << l;
  out << '\n';
  char buf[64];
  for (size_t i = 0; i < scores.size(); ++i) {
    out << i;
    for (double v : tape.value(scores[i])) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

namespace detail {

struct Snapshot {
  std::vector<std::vector<double>> values;
};

inline Snapshot take_snapshot(BilstmCrfModel& m) {
  Snapshot s;
  for (autodiff::Tensor* t : m.parameters()) s.values.push_back(t->v);
  return s;
}

inline void restore_snapshot(BilstmCrfModel& m, const Snapshot& s) {
  auto ps = m.parameters();
  for (size_t i = 0; i < ps.size(); ++i) ps[i]->v = s.values[i];
}

inline double dev_per_syllable(BilstmCrfModel& m, const std::vector<EncodedSequence>& dev) {
  std::vector<eval::LineScore> scores;
  scores.reserve(dev.size());
  for (const EncodedSequence& seq : dev) {
    StressSeq pred = decode_to_stress(neural_predict(m, seq.observations), seq.mode);
    StressSeq gold = decode_to_stress(seq.labels, seq.mode);
    scores.push_back(eval::score_line(pred, {gold}));
  }
  return eval::aggregate(scores).per_syllable;
}

}  // namespace detail

// SGD with per-batch global-norm clipping; returns the best-on-dev
// checkpoint (final parameters when dev is empty). Deterministic under seed.
inline BilstmCrfModel train_neural(const std::vector<EncodedSequence>& data,
                                   const std::vector<EncodedSequence>& dev,
                                   const NeuralConfig& config) {
  if (data.empty()) throw std::invalid_argument("train_neural: empty training data");
  BilstmCrfModel m = build_model(data, config);

  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed ^ 0xA5A5A5A5ULL);

  double best_dev = -1.0;
  detail::Snapshot best;
  const int batch = std::max(1, config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (size_t at = 0; at < order.size(); at += batch) {
      std::vector<EncodedSequence> chunk;
      for (size_t j = at; j < std::min(order.size(), at + batch); ++j)
        chunk.push_back(data[order[j]]);
      m.zero_grads();
      uint64_t dropout_seed = config.seed * 0x9E3779B97F4A7C15ULL +
                              static_cast<uint64_t>(epoch) * 131071ULL + at;
      epoch_loss += neural_loss_and_gradients(m, chunk, /*train_mode=*/true, dropout_seed);
      clip_gradients(m);
      for (autodiff::Tensor* t : m.parameters())
        for (size_t i = 0; i < t->v.size(); ++i) t->v[i] -= config.lr * t->g[i];
    }
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("neural training diverged (non-finite epoch loss)");

    if (!dev.empty()) {
      double acc = detail::dev_per_syllable(m, dev);
      if (acc > best_dev) {
        best_dev = acc;
        best = detail::take_snapshot(m);
      }
      if (best_dev >= 100.0) break;  // cannot improve further
    }
  }
  if (!dev.empty() && best_dev >= 0.0) detail::restore_snapshot(m, best);
  return m;
}

}  // namespace metron::neural
