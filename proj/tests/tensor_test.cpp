// Tests for the reverse-mode differentiation kernel and the LSTM cell.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "metron/tensor.hpp"
#include "support/oracles.hpp"

namespace metron {
namespace {

using autodiff::LstmParams;
using autodiff::lstm_all_states;
using autodiff::lstm_final_state;
using autodiff::Tape;
using autodiff::Tensor;

void randomize(Tensor& t, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& v : t.v) v = dist(rng);
}

TEST(TapeTest, MatvecValues) {
  Tensor w(2, 3);
  w.v = {1, 2, 3, 4, 5, 6};
  Tape tape;
  int x = tape.input({1.0, 0.5, -1.0});
  int y = tape.matvec(&w, x);
  EXPECT_EQ(tape.value(y), (std::vector<double>{1 * 1 + 2 * 0.5 + 3 * -1, 4 + 2.5 - 6}));
}

TEST(TapeTest, SliceAndConcatRoundTrip) {
  Tape tape;
  int x = tape.input({1, 2, 3, 4});
  int a = tape.slice(x, 0, 2);
  int b = tape.slice(x, 2, 2);
  int y = tape.concat({b, a});
  EXPECT_EQ(tape.value(y), (std::vector<double>{3, 4, 1, 2}));
}

// Every op's gradient against central finite differences, through a graph
// that uses the whole op vocabulary.
TEST(TapeGradientTest, CompositeGraphMatchesFiniteDifferences) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed);
    Tensor w1(3, 4), w2(3, 3), bias(3, 1), emb(5, 4);
    randomize(w1, rng);
    randomize(w2, rng);
    randomize(bias, rng);
    randomize(emb, rng);
    std::vector<Tensor*> params = {&w1, &w2, &bias, &emb};

    auto loss_tape = [&](Tape& tape) {
      int x = tape.row(&emb, 1);
      int y = tape.row(&emb, 3);
      int h = tape.add(tape.matvec(&w1, x), tape.matvec(&w1, y));
      h = tape.add_param(h, &bias);
      int s = tape.sigmoid(h);
      int t = tape.tanh(tape.matvec(&w2, s));
      int m = tape.mul(s, t);
      int masked = tape.mul_const(m, {1.0, 0.0, 2.0});
      int joined = tape.concat({tape.slice(masked, 0, 2), tape.slice(masked, 1, 2)});
      return tape.sum(joined);
    };

    // analytic gradients
    for (Tensor* p : params) p->zero_grad();
    Tape tape;
    int loss = loss_tape(tape);
    tape.backward(loss);

    // finite differences over all parameters, flattened
    std::vector<std::pair<Tensor*, size_t>> coords;
    for (Tensor* p : params)
      for (size_t i = 0; i < p->size(); ++i) coords.emplace_back(p, i);
    std::vector<double> fd = oracles::finite_differences(
        coords.size(), [&](size_t i) { return coords[i].first->v[coords[i].second]; },
        [&](size_t i, double v) { coords[i].first->v[coords[i].second] = v; },
        [&] {
          Tape t2;
          return t2.scalar(loss_tape(t2));
        },
        1e-6);
    for (size_t i = 0; i < coords.size(); ++i) {
      double analytic = coords[i].first->g[coords[i].second];
      EXPECT_LT(oracles::relative_error(analytic, fd[i]), 1e-6)
          << "seed " << seed << " coord " << i;
    }
  }
}

TEST(TapeGradientTest, ChainCrfNllMatchesFiniteDifferences) {
  for (uint64_t seed = 20; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const int k = 2 + static_cast<int>(rng() % 2);
    const int n = 3;
    Tensor scores_w(k, 2), trans(k, k), bos(k, 1), eos(k, 1);
    randomize(scores_w, rng);
    randomize(trans, rng);
    randomize(bos, rng);
    randomize(eos, rng);
    std::vector<Tensor*> params = {&scores_w, &trans, &bos, &eos};
    std::vector<int> gold;
    for (int i = 0; i < n; ++i) gold.push_back(static_cast<int>(rng() % k));
    std::vector<std::vector<double>> inputs;
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int i = 0; i < n; ++i) inputs.push_back({dist(rng), dist(rng)});

    auto loss_tape = [&](Tape& tape) {
      std::vector<int> score_nodes;
      for (int i = 0; i < n; ++i)
        score_nodes.push_back(tape.matvec(&scores_w, tape.input(inputs[i])));
      return tape.chain_crf_nll(score_nodes, &trans, &bos, &eos, gold);
    };

    for (Tensor* p : params) p->zero_grad();
    Tape tape;
    int loss = loss_tape(tape);
    tape.backward(loss);

    std::vector<std::pair<Tensor*, size_t>> coords;
    for (Tensor* p : params)
      for (size_t i = 0; i < p->size(); ++i) coords.emplace_back(p, i);
    std::vector<double> fd = oracles::finite_differences(
        coords.size(), [&](size_t i) { return coords[i].first->v[coords[i].second]; },
        [&](size_t i, double v) { coords[i].first->v[coords[i].second] = v; },
        [&] {
          Tape t2;
          return t2.scalar(loss_tape(t2));
        },
        1e-6);
    for (size_t i = 0; i < coords.size(); ++i)
      EXPECT_LT(oracles::relative_error(coords[i].first->g[coords[i].second], fd[i]), 1e-6)
          << "seed " << seed << " coord " << i;
  }
}

// Gate arithmetic sanity: zero weights and biases keep the hidden state at
// zero for any input.
TEST(LstmTest, ZeroParametersKeepZeroState) {
  LstmParams p(3, 4);  // all tensors start at zero
  Tape tape;
  std::mt19937_64 rng(7);
  std::vector<int> inputs;
  std::uniform_real_distribution<double> dist(-2, 2);
  for (int i = 0; i < 5; ++i) inputs.push_back(tape.input({dist(rng), dist(rng), dist(rng)}));
  for (int h : lstm_all_states(tape, p, inputs))
    for (double v : tape.value(h)) EXPECT_EQ(v, 0.0);
}

TEST(LstmTest, FinalStateMatchesLastOfAllStates) {
  std::mt19937_64 rng(8);
  LstmParams p(2, 3);
  randomize(p.w, rng);
  randomize(p.u, rng);
  randomize(p.b, rng);
  Tape tape;
  std::vector<int> inputs = {tape.input({0.5, -1.0}), tape.input({1.0, 0.25})};
  int final_h = lstm_final_state(tape, p, inputs);
  std::vector<int> all = lstm_all_states(tape, p, inputs);
  EXPECT_EQ(tape.value(final_h), tape.value(all.back()));
}

TEST(LstmTest, GradientsFlowThroughSteps) {
  std::mt19937_64 rng(9);
  LstmParams p(2, 2);
  randomize(p.w, rng);
  randomize(p.u, rng);
  randomize(p.b, rng);
  std::vector<Tensor*> params = {&p.w, &p.u, &p.b};

  std::vector<std::vector<double>> inputs = {{0.3, -0.7}, {-0.2, 0.9}, {1.1, 0.0}};
  auto loss_tape = [&](Tape& tape) {
    std::vector<int> ins;
    for (const auto& v : inputs) ins.push_back(tape.input(v));
    return tape.sum(lstm_final_state(tape, p, ins));
  };

  for (Tensor* t : params) t->zero_grad();
  Tape tape;
  int loss = loss_tape(tape);
  tape.backward(loss);

  std::vector<std::pair<Tensor*, size_t>> coords;
  for (Tensor* t : params)
    for (size_t i = 0; i < t->size(); ++i) coords.emplace_back(t, i);
  std::vector<double> fd = oracles::finite_differences(
      coords.size(), [&](size_t i) { return coords[i].first->v[coords[i].second]; },
      [&](size_t i, double v) { coords[i].first->v[coords[i].second] = v; },
      [&] {
        Tape t2;
        return t2.scalar(loss_tape(t2));
      },
      1e-6);
  for (size_t i = 0; i < coords.size(); ++i)
    EXPECT_LT(oracles::relative_error(coords[i].first->g[coords[i].second], fd[i]), 1e-6);
}

}  // namespace
}  // namespace metron
