#pragma once

// Graded symmetric algebra of R^n in the monomial basis.
//
// A SymTensor of degree k stores the coefficients c_alpha of
// K = sum_alpha c_alpha e^alpha, with e^alpha = e_1^{alpha_1} ... e_n^{alpha_n}
// built from the unnormalized symmetric product (v.u = v(x)u + u(x)v). In this
// basis the symmetric product is multi-index addition, v. is multiplication by
// the linear form <v, x>, v_| is the directional derivative, Lambda is the
// Euclidean Laplacian, L is multiplication by |x|^2, and
// <e^alpha, e^beta> = delta_{alpha beta} alpha!. The associated polynomial
// (1/k!) g(K, v^k) is sum_alpha c_alpha v^alpha.
//
// Degrees below zero denote the zero space: Lambda of a degree-0 or degree-1
// tensor and contraction of a degree-0 tensor return such a void tensor, so
// identities like [Lambda, L] = 2n + 4 deg evaluate uniformly in every degree.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "symfiber/errors.hpp"
#include "symfiber/multi_index.hpp"
#include "symfiber/scalar.hpp"

namespace symfiber {

template <Scalar S>
using Vec = std::vector<S>;

template <Scalar S>
Vec<S> frame_vector(int n, int i) {
  Vec<S> v(static_cast<std::size_t>(n), scalar<S>(0));
  v.at(static_cast<std::size_t>(i)) = scalar<S>(1);
  return v;
}

template <Scalar S>
class SymTensor {
 public:
  SymTensor() : SymTensor(1, 0) {}
  SymTensor(int n, int k) : n_(n), k_(k), basis_(&MonomialBasis::get(n, k)), coeffs_(basis_->size(), scalar<S>(0)) {
    require_dims(n >= 1, "SymTensor requires n >= 1");
  }
  SymTensor(int n, int k, Vec<S> coeffs) : SymTensor(n, k) {
    require_dims(coeffs.size() == coeffs_.size(), "coefficient vector has length " + std::to_string(coeffs.size()) +
                                                      ", expected " + std::to_string(coeffs_.size()));
    coeffs_ = std::move(coeffs);
  }

  static SymTensor zero(int n, int k) { return SymTensor(n, k); }
  static SymTensor one(int n) {
    SymTensor t(n, 0);
    t.coeffs_[0] = scalar<S>(1);
    return t;
  }
  /// The basis vector e_i as a degree-1 tensor.
  static SymTensor frame(int n, int i) {
    require_dims(i >= 0 && i < n, "frame index out of range");
    SymTensor t(n, 1);
    t.coeffs_[t.basis_->rank(MultiIndex::unit(n, i))] = scalar<S>(1);
    return t;
  }
  static SymTensor vector(std::span<const S> v) {
    const int n = static_cast<int>(v.size());
    SymTensor t(n, 1);
    for (int i = 0; i < n; ++i) t.coeffs_[t.basis_->rank(MultiIndex::unit(n, i))] = v[static_cast<std::size_t>(i)];
    return t;
  }
  static SymTensor monomial(const MultiIndex& alpha, S value) {
    SymTensor t(alpha.size(), alpha.degree());
    t.coeffs_[t.basis_->rank(alpha)] = std::move(value);
    return t;
  }

  int n() const { return n_; }
  int degree() const { return k_; }
  bool is_void() const { return k_ < 0; }
  std::size_t size() const { return coeffs_.size(); }
  const MonomialBasis& basis() const { return *basis_; }

  const Vec<S>& coeffs() const { return coeffs_; }
  Vec<S>& coeffs() { return coeffs_; }
  const S& operator[](std::size_t i) const { return coeffs_[i]; }
  S& operator[](std::size_t i) { return coeffs_[i]; }
  const S& at(const MultiIndex& alpha) const { return coeffs_[basis_->rank(alpha)]; }
  S& at(const MultiIndex& alpha) { return coeffs_[basis_->rank(alpha)]; }

  bool is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const S& c) { return symfiber::is_zero(c); });
  }
  double max_abs() const {
    double m = 0.0;
    for (const S& c : coeffs_) m = std::max(m, abs_double(c));
    return m;
  }

  SymTensor& operator+=(const SymTensor& o) {
    check_same(o, "+");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    check_same(o, "-");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SymTensor& operator*=(const S& s) {
    for (S& c : coeffs_) c *= s;
    return *this;
  }
  /// this += s * o
  SymTensor& add_scaled(const S& s, const SymTensor& o) {
    check_same(o, "add_scaled");
    if (symfiber::is_zero(s)) return *this;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (!symfiber::is_zero(o.coeffs_[i])) coeffs_[i] += s * o.coeffs_[i];
    }
    return *this;
  }

  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(const S& s, SymTensor a) { return a *= s; }
  friend SymTensor operator-(SymTensor a) {
    for (S& c : a.coeffs_) c = -c;
    return a;
  }
  friend bool operator==(const SymTensor& a, const SymTensor& b) {
    return a.n_ == b.n_ && a.k_ == b.k_ && a.coeffs_ == b.coeffs_;
  }

 private:
  void check_same(const SymTensor& o, const char* op) const {
    require_dims(n_ == o.n_ && k_ == o.k_, std::string("operator ") + op + ": (n,k)=(" + std::to_string(n_) + "," +
                                               std::to_string(k_) + ") vs (" + std::to_string(o.n_) + "," +
                                               std::to_string(o.k_) + ")");
  }

  int n_;
  int k_;
  const MonomialBasis* basis_;
  Vec<S> coeffs_;
};

/// e_i . K
template <Scalar S>
SymTensor<S> frame_mul(int i, const SymTensor<S>& K) {
  require_dims(i >= 0 && i < K.n(), "frame index out of range");
  SymTensor<S> out(K.n(), K.degree() + 1);
  if (K.is_void()) return out;
  const auto up = K.basis().raise(i);
  for (std::size_t a = 0; a < K.size(); ++a) {
    if (!is_zero(K[a])) out[up[a]] += K[a];
  }
  return out;
}

/// e_i _| K
template <Scalar S>
SymTensor<S> frame_contract(int i, const SymTensor<S>& K) {
  require_dims(i >= 0 && i < K.n(), "frame index out of range");
  SymTensor<S> out(K.n(), K.degree() - 1);
  if (out.is_void()) return out;
  const auto down = K.basis().lower(i);
  const auto ex = K.basis().exponent(i);
  for (std::size_t a = 0; a < K.size(); ++a) {
    if (down[a] == MonomialBasis::kNone || is_zero(K[a])) continue;
    out[down[a]] += scalar<S>(static_cast<long>(ex[a])) * K[a];
  }
  return out;
}

/// A . B; multi-index addition of coefficients.
template <Scalar S>
SymTensor<S> sym_mul(const SymTensor<S>& A, const SymTensor<S>& B) {
  require_dims(A.n() == B.n(), "sym_mul: dimension mismatch");
  SymTensor<S> out(A.n(), A.degree() + B.degree());
  if (A.is_void() || B.is_void()) return out;
  const auto& bout = out.basis();
  for (std::size_t a = 0; a < A.size(); ++a) {
    if (is_zero(A[a])) continue;
    for (std::size_t b = 0; b < B.size(); ++b) {
      if (is_zero(B[b])) continue;
      out[bout.rank(A.basis()[a] + B.basis()[b])] += A[a] * B[b];
    }
  }
  return out;
}

/// v . K
template <Scalar S>
SymTensor<S> vec_mul(std::type_identity_t<std::span<const S>> v, const SymTensor<S>& K) {
  require_dims(static_cast<int>(v.size()) == K.n(), "vec_mul: dimension mismatch");
  SymTensor<S> out(K.n(), K.degree() + 1);
  if (K.is_void()) return out;
  for (int i = 0; i < K.n(); ++i) {
    const S& vi = v[static_cast<std::size_t>(i)];
    if (is_zero(vi)) continue;
    const auto up = K.basis().raise(i);
    for (std::size_t a = 0; a < K.size(); ++a) {
      if (!is_zero(K[a])) out[up[a]] += vi * K[a];
    }
  }
  return out;
}

/// v _| K, the metric adjoint of v . ; (v_|K)_beta = sum_i v_i (beta_i + 1) c_{beta + delta_i}.
template <Scalar S>
SymTensor<S> contract(std::type_identity_t<std::span<const S>> v, const SymTensor<S>& K) {
  require_dims(static_cast<int>(v.size()) == K.n(), "contract: dimension mismatch");
  SymTensor<S> out(K.n(), K.degree() - 1);
  if (out.is_void()) return out;
  for (int i = 0; i < K.n(); ++i) {
    const S& vi = v[static_cast<std::size_t>(i)];
    if (is_zero(vi)) continue;
    const auto down = K.basis().lower(i);
    const auto ex = K.basis().exponent(i);
    for (std::size_t a = 0; a < K.size(); ++a) {
      if (down[a] == MonomialBasis::kNone || is_zero(K[a])) continue;
      out[down[a]] += vi * scalar<S>(static_cast<long>(ex[a])) * K[a];
    }
  }
  return out;
}

/// Lambda K = sum_i e_i _| e_i _| K.
template <Scalar S>
SymTensor<S> lambda_op(const SymTensor<S>& K) {
  SymTensor<S> out(K.n(), K.degree() - 2);
  if (out.is_void()) return out;
  for (int i = 0; i < K.n(); ++i) {
    const auto down = K.basis().lower(i);
    const auto down2 = MonomialBasis::get(K.n(), K.degree() - 1).lower(i);
    const auto ex = K.basis().exponent(i);
    for (std::size_t a = 0; a < K.size(); ++a) {
      if (ex[a] < 2 || is_zero(K[a])) continue;
      const long f = static_cast<long>(ex[a]) * static_cast<long>(ex[a] - 1);
      out[down2[down[a]]] += scalar<S>(f) * K[a];
    }
  }
  return out;
}

/// L K = (sum_i e_i . e_i) . K.
template <Scalar S>
SymTensor<S> l_op(const SymTensor<S>& K) {
  SymTensor<S> out(K.n(), K.degree() + 2);
  if (K.is_void()) return out;
  const auto& mid = MonomialBasis::get(K.n(), K.degree() + 1);
  for (int i = 0; i < K.n(); ++i) {
    const auto up = K.basis().raise(i);
    const auto up2 = mid.raise(i);
    for (std::size_t a = 0; a < K.size(); ++a) {
      if (!is_zero(K[a])) out[up2[up[a]]] += K[a];
    }
  }
  return out;
}

/// The tensor L = sum_i e_i . e_i = 2g.
template <Scalar S>
SymTensor<S> metric_l(int n) {
  return l_op(SymTensor<S>::one(n));
}

template <Scalar S>
SymTensor<S> deg_op(const SymTensor<S>& K) {
  return scalar<S>(K.degree()) * K;
}

/// <A, B> = sum_alpha alpha! a_alpha b_alpha.
template <Scalar S>
S inner(const SymTensor<S>& A, const SymTensor<S>& B) {
  require_dims(A.n() == B.n() && A.degree() == B.degree(), "inner: (n,k) mismatch");
  S acc = scalar<S>(0);
  const auto w = A.basis().factorial_weight();
  if (A.degree() > MonomialBasis::kMaxDegreeForWeights) throw DomainError("inner: degree too large for weights");
  for (std::size_t a = 0; a < A.size(); ++a) {
    if (is_zero(A[a]) || is_zero(B[a])) continue;
    acc += scalar<S>(static_cast<long>(w[a])) * A[a] * B[a];
  }
  return acc;
}

/// P_K(v) = (1/k!) g(K, v^k) = sum_alpha c_alpha v^alpha.
template <Scalar S>
S evaluate(const SymTensor<S>& K, std::type_identity_t<std::span<const S>> v) {
  require_dims(static_cast<int>(v.size()) == K.n(), "evaluate: dimension mismatch");
  if (K.is_void()) return scalar<S>(0);
  std::vector<Vec<S>> powers(static_cast<std::size_t>(K.n()));
  for (int i = 0; i < K.n(); ++i) {
    auto& p = powers[static_cast<std::size_t>(i)];
    p.push_back(scalar<S>(1));
    for (int e = 1; e <= K.degree(); ++e) p.push_back(p.back() * v[static_cast<std::size_t>(i)]);
  }
  S acc = scalar<S>(0);
  for (std::size_t a = 0; a < K.size(); ++a) {
    if (is_zero(K[a])) continue;
    S term = K[a];
    for (int i = 0; i < K.n(); ++i) {
      const auto e = K.basis().exponent(i)[a];
      if (e) term *= powers[static_cast<std::size_t>(i)][e];
    }
    acc += term;
  }
  return acc;
}

/// Lambda^i L^i H = c H for trace-free H of degree m; c = prod_{j=1..i} j (2n + 4m + 4j - 4).
template <Scalar S>
S lambda_l_power_factor(int n, int m, int i) {
  S c = scalar<S>(1);
  for (int j = 1; j <= i; ++j) c *= scalar<S>(static_cast<long>(j) * (2L * n + 4L * m + 4L * j - 4L));
  return c;
}

template <Scalar S>
SymTensor<S> l_power(const SymTensor<S>& K, int i) {
  SymTensor<S> out = K;
  for (int j = 0; j < i; ++j) out = l_op(out);
  return out;
}

template <Scalar S>
SymTensor<S> lambda_power(const SymTensor<S>& K, int i) {
  SymTensor<S> out = K;
  for (int j = 0; j < i; ++j) out = lambda_op(out);
  return out;
}

/// K = K_0 + L K_1 + L^2 K_2 + ... with every K_i trace-free. Returns [K_0, K_1, ...].
/// Solved top-down: Lambda^p of the remainder isolates K_p up to the factor above.
template <Scalar S>
std::vector<SymTensor<S>> standard_decomposition(const SymTensor<S>& K) {
  require_domain(K.n() >= 2, "standard_decomposition requires n >= 2");
  if (K.is_void()) return {};
  const int top = K.degree() / 2;
  std::vector<SymTensor<S>> parts(static_cast<std::size_t>(top + 1));
  SymTensor<S> remainder = K;
  for (int p = top; p >= 0; --p) {
    const int m = K.degree() - 2 * p;
    SymTensor<S> Kp = lambda_power(remainder, p);
    if (p > 0) {
      const S c = lambda_l_power_factor<S>(K.n(), m, p);
      Kp *= S(scalar<S>(1) / c);
      remainder -= l_power(Kp, p);
    }
    parts[static_cast<std::size_t>(p)] = std::move(Kp);
  }
  return parts;
}

template <Scalar S>
SymTensor<S> reconstruct(const std::vector<SymTensor<S>>& parts) {
  require_dims(!parts.empty(), "reconstruct: empty decomposition");
  SymTensor<S> out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += l_power(parts[i], static_cast<int>(i));
  return out;
}

/// K_0, the trace-free part.
template <Scalar S>
SymTensor<S> trace_free_part(const SymTensor<S>& K) {
  if (K.is_void()) return K;
  if (K.degree() < 2) return K;
  return standard_decomposition(K).front();
}

/// (v . K)_0 = v . K - 1/(n+2k-2) L (v _| K), for trace-free K.
template <Scalar S>
SymTensor<S> project_v_mul0(std::type_identity_t<std::span<const S>> v, const SymTensor<S>& K) {
  const int denom = K.n() + 2 * K.degree() - 2;
  require_domain(denom != 0, "project_v_mul0: n + 2k - 2 = 0");
  SymTensor<S> out = vec_mul(v, K);
  if (K.degree() >= 1) out.add_scaled(S(scalar<S>(-1, denom)), l_op(contract(v, K)));
  return out;
}

/// (e_i . K)_0 for trace-free K.
template <Scalar S>
SymTensor<S> frame_mul0(int i, const SymTensor<S>& K) {
  const int denom = K.n() + 2 * K.degree() - 2;
  require_domain(denom != 0, "frame_mul0: n + 2k - 2 = 0");
  SymTensor<S> out = frame_mul(i, K);
  if (K.degree() >= 1) out.add_scaled(S(scalar<S>(-1, denom)), l_op(frame_contract(i, K)));
  return out;
}

/// Coefficient-wise conversion between scalar modes (rational -> float only).
template <Scalar T>
SymTensor<T> convert(const SymTensor<Rational>& K) {
  Vec<T> c;
  c.reserve(K.size());
  for (const auto& x : K.coeffs()) c.push_back(ScalarTraits<T>::from_rational(x));
  return SymTensor<T>(K.n(), K.degree(), std::move(c));
}

}  // namespace symfiber
