// Minimal tape-based reverse-mode differentiation over dense double tensors.
// Parameters live outside the tape; tape nodes reference them directly so a
// tape is cheap to rebuild per sequence.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "metron/chain.hpp"

namespace metron::autodiff {

// A persistent parameter (or its gradient accumulator).
struct Tensor {
  int rows = 0, cols = 1;
  std::vector<double> v, g;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0),
                         g(static_cast<size_t>(r) * c, 0.0) {}

  size_t size() const { return v.size(); }
  void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

class Tape {
 public:
  // Values are computed eagerly; backward() replays the tape in reverse.
  int input(std::vector<double> v) {
    Node n;
    n.v = std::move(v);
    n.back = nullptr;
    return push(std::move(n));
  }

  int zeros(int dim) { return input(std::vector<double>(dim, 0.0)); }

  // y = W x  (W is an external parameter)
  int matvec(Tensor* w, int x) {
    const Node& nx = node(x);
    if (w->cols != static_cast<int>(nx.v.size()))
      throw std::invalid_argument("matvec: dimension mismatch");
    Node n;
    n.v.assign(w->rows, 0.0);
    for (int r = 0; r < w->rows; ++r) {
      double s = 0.0;
      for (int c = 0; c < w->cols; ++c) s += w->v[static_cast<size_t>(r) * w->cols + c] * nx.v[c];
      n.v[r] = s;
    }
    n.back = [this, w, x](const Node& out) {
      Node& nx2 = node_mut(x);
      for (int r = 0; r < w->rows; ++r) {
        double go = out.g[r];
        if (go == 0.0) continue;
        for (int c = 0; c < w->cols; ++c) {
          w->g[static_cast<size_t>(r) * w->cols + c] += go * nx2.v[c];
          nx2.g[c] += go * w->v[static_cast<size_t>(r) * w->cols + c];
        }
      }
    };
    return push(std::move(n));
  }

  int add(int a, int b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.v.size() != nb.v.size()) throw std::invalid_argument("add: size mismatch");
    Node n;
    n.v.resize(na.v.size());
    for (size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] + nb.v[i];
    n.back = [this, a, b](const Node& out) {
      Node& na2 = node_mut(a);
      Node& nb2 = node_mut(b);
      for (size_t i = 0; i < out.g.size(); ++i) {
        na2.g[i] += out.g[i];
        nb2.g[i] += out.g[i];
      }
    };
    return push(std::move(n));
  }

  // x + b for a parameter vector b
  int add_param(int x, Tensor* b) {
    const Node& nx = node(x);
    if (nx.v.size() != b->size()) throw std::invalid_argument("add_param: size mismatch");
    Node n;
    n.v.resize(nx.v.size());
    for (size_t i = 0; i < n.v.size(); ++i) n.v[i] = nx.v[i] + b->v[i];
    n.back = [this, x, b](const Node& out) {
      Node& nx2 = node_mut(x);
      for (size_t i = 0; i < out.g.size(); ++i) {
        nx2.g[i] += out.g[i];
        b->g[i] += out.g[i];
      }
    };
    return push(std::move(n));
  }

  int mul(int a, int b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.v.size() != nb.v.size()) throw std::invalid_argument("mul: size mismatch");
    Node n;
    n.v.resize(na.v.size());
    for (size_t i = 0; i < n.v.size(); ++i) n.v[i] = na.v[i] * nb.v[i];
    n.back = [this, a, b](const Node& out) {
      Node& na2 = node_mut(a);
      Node& nb2 = node_mut(b);
      for (size_t i = 0; i < out.g.size(); ++i) {
        na2.g[i] += out.g[i] * nb2.v[i];
        nb2.g[i] += out.g[i] * na2.v[i];
      }
    };
    return push(std::move(n));
  }

  // elementwise multiply by a fixed mask (dropout)
  int mul_const(int x, std::vector<double> mask) {
    const Node& nx = node(x);
    if (nx.v.size() != mask.size()) throw std::invalid_argument("mul_const: size mismatch");
    Node n;
    n.v.resize(nx.v.size());
    for (size_t i = 0; i < n.v.size(); ++i) n.v[i] = nx.v[i] * mask[i];
    n.back = [this, x, mask = std::move(mask)](const Node& out) {
      Node& nx2 = node_mut(x);
      for (size_t i = 0; i < out.g.size(); ++i) nx2.g[i] += out.g[i] * mask[i];
    };
    return push(std::move(n));
  }

  int sigmoid(int x) {
    const Node& nx = node(x);
    Node n;
    n.v.resize(nx.v.size());
    for (size_t i = 0; i < n.v.size(); ++i) n.v[i] = 1.0 / (1.0 + std::exp(-nx.v[i]));
    n.back = [this, x](const Node& out) {
      Node& nx2 = node_mut(x);
      for (size_t i = 0; i < out.g.size(); ++i)
        nx2.g[i] += out.g[i] * out.v[i] * (1.0 - out.v[i]);
    };
    return push(std::move(n));
  }

  int tanh(int x) {
    const Node& nx = node(x);
    Node n;
    n.v.resize(nx.v.size());
    for (size_t i = 0; i < n.v.size(); ++i) n.v[i] = std::tanh(nx.v[i]);
    n.back = [this, x](const Node& out) {
      Node& nx2 = node_mut(x);
      for (size_t i = 0; i < out.g.size(); ++i)
        nx2.g[i] += out.g[i] * (1.0 - out.v[i] * out.v[i]);
    };
    return push(std::move(n));
  }

  int slice(int x, int offset, int len) {
    const Node& nx = node(x);
    if (offset < 0 || offset + len > static_cast<int>(nx.v.size()))
      throw std::invalid_argument("slice: out of range");
    Node n;
    n.v.assign(nx.v.begin() + offset, nx.v.begin() + offset + len);
    n.back = [this, x, offset](const Node& out) {
      Node& nx2 = node_mut(x);
      for (size_t i = 0; i < out.g.size(); ++i) nx2.g[offset + i] += out.g[i];
    };
    return push(std::move(n));
  }

  int concat(const std::vector<int>& parts) {
    Node n;
    for (int p : parts) {
      const Node& np = node(p);
      n.v.insert(n.v.end(), np.v.begin(), np.v.end());
    }
    n.back = [this, parts](const Node& out) {
      size_t at = 0;
      for (int p : parts) {
        Node& np = node_mut(p);
        for (size_t i = 0; i < np.v.size(); ++i) np.g[i] += out.g[at + i];
        at += np.v.size();
      }
    };
    return push(std::move(n));
  }

  // one row of an embedding matrix as a vector
  int row(Tensor* e, int r) {
    if (r < 0 || r >= e->rows) throw std::invalid_argument("row: index out of range");
    Node n;
    n.v.assign(e->v.begin() + static_cast<size_t>(r) * e->cols,
               e->v.begin() + static_cast<size_t>(r + 1) * e->cols);
    n.back = [e, r](const Node& out) {
      for (size_t i = 0; i < out.g.size(); ++i)
        e->g[static_cast<size_t>(r) * e->cols + i] += out.g[i];
    };
    return push(std::move(n));
  }

  // Negative log-likelihood of `gold` under a linear-chain CRF whose unary
  // scores are the given nodes and whose transition factors are parameters.
  // Backward uses the forward-backward marginals in closed form.
  int chain_crf_nll(const std::vector<int>& score_nodes, Tensor* trans, Tensor* bos, Tensor* eos,
                    const std::vector<int>& gold) {
    const int n = static_cast<int>(score_nodes.size());
    const int k = trans->rows;
    if (n == 0) throw std::invalid_argument("chain_crf_nll: empty sequence");
    if (static_cast<int>(gold.size()) != n)
      throw std::invalid_argument("chain_crf_nll: gold length mismatch");

    chain::Lattice lat(n, k);
    for (int i = 0; i < n; ++i) {
      const Node& s = node(score_nodes[i]);
      if (static_cast<int>(s.v.size()) != k)
        throw std::invalid_argument("chain_crf_nll: score dimension mismatch");
      for (int y = 0; y < k; ++y) lat.u(i, y) = s.v[y];
    }
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) lat.t(a, b) = trans->at(a, b);
    for (int y = 0; y < k; ++y) {
      lat.bos[y] = bos->v[y];
      lat.eos[y] = eos->v[y];
    }

    chain::Posteriors post = chain::posteriors(lat);
    double nll = post.log_z - chain::score_path(lat, gold);

    Node out;
    out.v = {nll};
    out.back = [this, score_nodes, trans, bos, eos, gold, post, n, k](const Node& o) {
      double s = o.g[0];
      for (int i = 0; i < n; ++i) {
        Node& sn = node_mut(score_nodes[i]);
        for (int y = 0; y < k; ++y) {
          double d = post.gamma[static_cast<size_t>(i) * k + y] - (gold[i] == y ? 1.0 : 0.0);
          sn.g[y] += s * d;
        }
      }
      for (int i = 0; i + 1 < n; ++i)
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) {
            double d = post.xi[(static_cast<size_t>(i) * k + a) * k + b] -
                       (gold[i] == a && gold[i + 1] == b ? 1.0 : 0.0);
            trans->g[static_cast<size_t>(a) * k + b] += s * d;
          }
      for (int y = 0; y < k; ++y) {
        bos->g[y] += s * (post.gamma[y] - (gold[0] == y ? 1.0 : 0.0));
        eos->g[y] +=
            s * (post.gamma[static_cast<size_t>(n - 1) * k + y] - (gold[n - 1] == y ? 1.0 : 0.0));
      }
    };
    return push(std::move(out));
  }

  // sum of all elements, as a scalar node
  int sum(int x) {
    const Node& nx = node(x);
    double s = 0.0;
    for (double v : nx.v) s += v;
    Node n;
    n.v = {s};
    n.back = [this, x](const Node& out) {
      Node& nx2 = node_mut(x);
      for (double& g : nx2.g) g += out.g[0];
    };
    return push(std::move(n));
  }

  int add_scalars(const std::vector<int>& xs) {
    Node n;
    double s = 0.0;
    for (int x : xs) s += node(x).v.at(0);
    n.v = {s};
    n.back = [this, xs](const Node& out) {
      for (int x : xs) node_mut(x).g[0] += out.g[0];
    };
    return push(std::move(n));
  }

  const std::vector<double>& value(int id) const { return node(id).v; }
  double scalar(int id) const { return node(id).v.at(0); }

  void backward(int id) {
    for (Node& n : nodes_) n.g.assign(n.v.size(), 0.0);
    nodes_[id].g[0] = 1.0;
    for (int i = id; i >= 0; --i)
      if (nodes_[i].back) nodes_[i].back(nodes_[i]);
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<double> v, g;
    std::function<void(const Node&)> back;
  };

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Node& node(int id) const { return nodes_.at(id); }
  Node& node_mut(int id) { return nodes_.at(id); }

  std::vector<Node> nodes_;
};

// Packed-gate LSTM parameters; gate order in the packed rows is i, f, o, g.
struct LstmParams {
  Tensor w;  // 4H x in
  Tensor u;  // 4H x H
  Tensor b;  // 4H
  int hidden = 0;

  LstmParams() = default;
  LstmParams(int in_dim, int hidden_dim)
      : w(4 * hidden_dim, in_dim), u(4 * hidden_dim, hidden_dim), b(4 * hidden_dim, 1),
        hidden(hidden_dim) {}
};

struct LstmState {
  int h = -1, c = -1;
};

inline LstmState lstm_step(Tape& tape, LstmParams& p, int x, const LstmState& prev) {
  const int h = p.hidden;
  int z = tape.add_param(tape.add(tape.matvec(&p.w, x), tape.matvec(&p.u, prev.h)), &p.b);
  int gi = tape.sigmoid(tape.slice(z, 0, h));
  int gf = tape.sigmoid(tape.slice(z, h, h));
  int go = tape.sigmoid(tape.slice(z, 2 * h, h));
  int gg = tape.tanh(tape.slice(z, 3 * h, h));
  LstmState out;
  out.c = tape.add(tape.mul(gf, prev.c), tape.mul(gi, gg));
  out.h = tape.mul(go, tape.tanh(out.c));
  return out;
}

// Runs an LSTM over the inputs and returns the final hidden state node.
inline int lstm_final_state(Tape& tape, LstmParams& p, const std::vector<int>& inputs) {
  LstmState state{tape.zeros(p.hidden), tape.zeros(p.hidden)};
  for (int x : inputs) state = lstm_step(tape, p, x, state);
  return state.h;
}

inline std::vector<int> lstm_all_states(Tape& tape, LstmParams& p, const std::vector<int>& inputs) {
  std::vector<int> out;
  out.reserve(inputs.size());
  LstmState state{tape.zeros(p.hidden), tape.zeros(p.hidden)};
  for (int x : inputs) {
    state = lstm_step(tape, p, x, state);
    out.push_back(state.h);
  }
  return out;
}

}  // namespace metron::autodiff
