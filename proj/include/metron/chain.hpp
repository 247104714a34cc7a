// Log-space dynamic programs over a first-order label chain: Viterbi with
// lexicographic tie-breaking, forward/backward partition sums, and posterior
// marginals. Shared by the CRF and the neural CRF layer.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace metron::chain {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double logsumexp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Additive factor scores for one sequence: unary[i*k+y], trans[from*k+to],
// plus virtual BOS/EOS factors.
struct Lattice {
  int n = 0;
  int k = 0;
  std::vector<double> unary;
  std::vector<double> trans;
  std::vector<double> bos;
  std::vector<double> eos;

  Lattice() = default;
  Lattice(int n_, int k_)
      : n(n_), k(k_), unary(static_cast<size_t>(n_) * k_, 0.0),
        trans(static_cast<size_t>(k_) * k_, 0.0), bos(k_, 0.0), eos(k_, 0.0) {}

  double u(int i, int y) const { return unary[static_cast<size_t>(i) * k + y]; }
  double& u(int i, int y) { return unary[static_cast<size_t>(i) * k + y]; }
  double t(int a, int b) const { return trans[static_cast<size_t>(a) * k + b]; }
  double& t(int a, int b) { return trans[static_cast<size_t>(a) * k + b]; }
};

inline double score_path(const Lattice& lat, const std::vector<int>& path) {
  double s = lat.bos[path[0]] + lat.u(0, path[0]);
  for (int i = 1; i < lat.n; ++i) s += lat.t(path[i - 1], path[i]) + lat.u(i, path[i]);
  return s + lat.eos[path.back()];
}

// Max-score path; exact ties resolved toward the lexicographically smaller
// label sequence (paths are compared, not just backpointers).
inline std::vector<int> viterbi(const Lattice& lat) {
  if (lat.n <= 0) throw std::invalid_argument("viterbi: empty lattice");
  const int n = lat.n, k = lat.k;
  std::vector<double> score(k);
  std::vector<std::vector<int>> path(k);
  for (int y = 0; y < k; ++y) {
    score[y] = lat.bos[y] + lat.u(0, y);
    path[y] = {y};
  }
  for (int i = 1; i < n; ++i) {
    std::vector<double> next_score(k, kNegInf);
    std::vector<std::vector<int>> next_path(k);
    for (int y = 0; y < k; ++y) {
      int best_prev = 0;
      double best = score[0] + lat.t(0, y);
      for (int p = 1; p < k; ++p) {
        double cand = score[p] + lat.t(p, y);
        if (cand > best || (cand == best && path[p] < path[best_prev])) {
          best = cand;
          best_prev = p;
        }
      }
      next_score[y] = best + lat.u(i, y);
      next_path[y] = path[best_prev];
      next_path[y].push_back(y);
    }
    score = std::move(next_score);
    path = std::move(next_path);
  }
  int best_y = 0;
  double best = score[0] + lat.eos[0];
  for (int y = 1; y < k; ++y) {
    double cand = score[y] + lat.eos[y];
    if (cand > best || (cand == best && path[y] < path[best_y])) {
      best = cand;
      best_y = y;
    }
  }
  return path[best_y];
}

// alphas[i*k+y] includes the unary at i. Returns logZ.
inline double log_forward(const Lattice& lat, std::vector<double>* alphas = nullptr) {
  const int n = lat.n, k = lat.k;
  std::vector<double> a(static_cast<size_t>(n) * k);
  for (int y = 0; y < k; ++y) a[y] = lat.bos[y] + lat.u(0, y);
  std::vector<double> acc(k);
  for (int i = 1; i < n; ++i) {
    for (int y = 0; y < k; ++y) {
      for (int p = 0; p < k; ++p) acc[p] = a[static_cast<size_t>(i - 1) * k + p] + lat.t(p, y);
      a[static_cast<size_t>(i) * k + y] = logsumexp(acc) + lat.u(i, y);
    }
  }
  for (int y = 0; y < k; ++y) acc[y] = a[static_cast<size_t>(n - 1) * k + y] + lat.eos[y];
  if (alphas) *alphas = std::move(a);
  return logsumexp(acc);
}

// betas[i*k+y] excludes the unary at i. Returns logZ computed from the back.
inline double log_backward(const Lattice& lat, std::vector<double>* betas = nullptr) {
  const int n = lat.n, k = lat.k;
  std::vector<double> b(static_cast<size_t>(n) * k);
  for (int y = 0; y < k; ++y) b[static_cast<size_t>(n - 1) * k + y] = lat.eos[y];
  std::vector<double> acc(k);
  for (int i = n - 2; i >= 0; --i) {
    for (int y = 0; y < k; ++y) {
      for (int q = 0; q < k; ++q)
        acc[q] = lat.t(y, q) + lat.u(i + 1, q) + b[static_cast<size_t>(i + 1) * k + q];
      b[static_cast<size_t>(i) * k + y] = logsumexp(acc);
    }
  }
  for (int y = 0; y < k; ++y) acc[y] = lat.bos[y] + lat.u(0, y) + b[y];
  if (betas) *betas = std::move(b);
  return logsumexp(acc);
}

struct Posteriors {
  double log_z = 0.0;
  std::vector<double> gamma;  // n*k, position marginals
  std::vector<double> xi;     // (n-1)*k*k, transition marginals
};

inline Posteriors posteriors(const Lattice& lat) {
  const int n = lat.n, k = lat.k;
  std::vector<double> alphas, betas;
  Posteriors post;
  post.log_z = log_forward(lat, &alphas);
  log_backward(lat, &betas);

  post.gamma.resize(static_cast<size_t>(n) * k);
  for (int i = 0; i < n; ++i)
    for (int y = 0; y < k; ++y) {
      size_t at = static_cast<size_t>(i) * k + y;
      post.gamma[at] = std::exp(alphas[at] + betas[at] - post.log_z);
    }

  post.xi.resize(static_cast<size_t>(std::max(0, n - 1)) * k * k);
  for (int i = 0; i + 1 < n; ++i)
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double v = alphas[static_cast<size_t>(i) * k + a] + lat.t(a, b) + lat.u(i + 1, b) +
                   betas[static_cast<size_t>(i + 1) * k + b] - post.log_z;
        post.xi[(static_cast<size_t>(i) * k + a) * k + b] = std::exp(v);
      }
  return post;
}

}  // namespace metron::chain
