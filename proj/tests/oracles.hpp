#pragma once

// Test-side reference computations. None of these call into the library's
// arithmetic; they work from definitions (permutation sums, explicit
// polynomials, Gamma functions).

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "symfiber/sym_tensor.hpp"

namespace oracle {

using symfiber::Rational;

/// Word i_1 <= ... <= i_k listing each index i alpha_i times.
inline std::vector<int> word_of(const std::vector<int>& alpha) {
  std::vector<int> w;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (int c = 0; c < alpha[i]; ++c) w.push_back(static_cast<int>(i));
  }
  return w;
}

/// g(e_{a_1}...e_{a_k}, e_{b_1}...e_{b_k}) = sum over sigma of prod delta(a_i, b_sigma(i)).
inline long perm_inner(const std::vector<int>& alpha, const std::vector<int>& beta) {
  std::vector<int> a = word_of(alpha);
  std::vector<int> b = word_of(beta);
  if (a.size() != b.size()) return 0;
  std::vector<int> sigma(a.size());
  std::iota(sigma.begin(), sigma.end(), 0);
  long total = 0;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) ok = a[i] == b[static_cast<std::size_t>(sigma[i])];
    if (ok) ++total;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

/// Polynomial as an exponent -> coefficient map.
using Poly = std::map<std::vector<int>, Rational>;

inline Poly to_poly(const symfiber::SymTensor<Rational>& K) {
  Poly p;
  for (std::size_t a = 0; a < K.size(); ++a) {
    if (sgn(K[a]) != 0) p[K.basis()[a].entries()] = K[a];
  }
  return p;
}

inline Rational eval_poly(const Poly& p, const std::vector<Rational>& v) {
  Rational acc = 0;
  for (const auto& [e, c] : p) {
    Rational t = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (int j = 0; j < e[i]; ++j) t *= v[i];
    }
    acc += t;
  }
  return acc;
}

/// d/dv_i of a polynomial.
inline Poly derivative(const Poly& p, int i) {
  Poly out;
  for (const auto& [e, c] : p) {
    if (e[static_cast<std::size_t>(i)] == 0) continue;
    auto f = e;
    f[static_cast<std::size_t>(i)] -= 1;
    out[f] += c * e[static_cast<std::size_t>(i)];
  }
  return out;
}

inline Rational inner_by_permutations(const symfiber::SymTensor<Rational>& A, const symfiber::SymTensor<Rational>& B) {
  Rational acc = 0;
  for (std::size_t a = 0; a < A.size(); ++a) {
    if (sgn(A[a]) == 0) continue;
    for (std::size_t b = 0; b < B.size(); ++b) {
      if (sgn(B[b]) == 0) continue;
      acc += A[a] * B[b] * perm_inner(A.basis()[a].entries(), B.basis()[b].entries());
    }
  }
  return acc;
}

/// Integral of v^alpha over S^{n-1} divided by the sphere volume, via Gamma functions.
inline double sphere_average_gamma(const std::vector<int>& alpha) {
  for (int a : alpha) {
    if (a % 2) return 0.0;
  }
  const double n = static_cast<double>(alpha.size());
  double log_num = 0.0;
  double s = 0.0;
  for (int a : alpha) {
    log_num += std::lgamma((a + 1) / 2.0) - std::lgamma(0.5);
    s += a;
  }
  return std::exp(log_num + std::lgamma(n / 2.0) - std::lgamma((s + n) / 2.0));
}

/// Row-reduce in place; returns the rank.
inline int row_reduce(std::vector<std::vector<Rational>>& m) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < m.size(); ++c) {
    std::size_t piv = row;
    while (piv < m.size() && sgn(m[piv][c]) == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[row]);
    const Rational inv = 1 / m[row][c];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || sgn(m[r][c]) == 0) continue;
      const Rational f = m[r][c];
      for (std::size_t j = 0; j < cols; ++j) m[r][j] -= f * m[row][j];
    }
    ++row;
  }
  return static_cast<int>(row);
}

inline int rank_of(std::vector<std::vector<Rational>> m) { return row_reduce(m); }

/// Solve A x = b assuming a unique solution; A given as rows.
inline std::vector<Rational> solve_unique(std::vector<std::vector<Rational>> A, const std::vector<Rational>& b) {
  const std::size_t cols = A.empty() ? 0 : A[0].size();
  for (std::size_t r = 0; r < A.size(); ++r) A[r].push_back(b[r]);
  const int rk = row_reduce(A);
  std::vector<Rational> x(cols);
  for (int r = 0; r < rk; ++r) {
    std::size_t c = 0;
    while (c < cols && sgn(A[static_cast<std::size_t>(r)][c]) == 0) ++c;
    if (c < cols) x[c] = A[static_cast<std::size_t>(r)][cols];
  }
  return x;
}

}  // namespace oracle
