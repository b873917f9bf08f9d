#pragma once

// Algebraic curvature tensors and skew bundle curvatures.
//
// Convention: R(i,j,m,l) = g(R(e_i ^ e_j), e_m ^ e_l), and the endomorphism
// R_{ij} = R_{e_i,e_j} satisfies g(R_{ij} e_m, e_l) = R(i,j,m,l). With this,
// R = c id on Lambda^2 gives R_{X,Y} Z = c (g(X,Z) Y - g(Y,Z) X); the round
// sphere is c = -1.

#include <string>
#include <vector>

#include "symfiber/random.hpp"

namespace symfiber {

template <Scalar S>
class AlgCurvature {
 public:
  AlgCurvature() : AlgCurvature(2) {}
  explicit AlgCurvature(int n) : n_(n), c_(static_cast<std::size_t>(n * n * n * n), scalar<S>(0)) {
    require_dims(n >= 1, "AlgCurvature requires n >= 1");
  }

  int n() const { return n_; }
  const S& operator()(int i, int j, int k, int l) const { return c_[idx(i, j, k, l)]; }
  S& operator()(int i, int j, int k, int l) { return c_[idx(i, j, k, l)]; }
  const Vec<S>& data() const { return c_; }

  /// Sets R(i,j,k,l) and every entry related to it by the pair symmetries.
  void set_symmetric(int i, int j, int k, int l, const S& v) {
    (*this)(i, j, k, l) = v;
    (*this)(j, i, k, l) = -v;
    (*this)(i, j, l, k) = -v;
    (*this)(j, i, l, k) = v;
    (*this)(k, l, i, j) = v;
    (*this)(l, k, i, j) = -v;
    (*this)(k, l, j, i) = -v;
    (*this)(l, k, j, i) = v;
  }

  bool is_zero() const {
    for (const auto& x : c_) {
      if (!symfiber::is_zero(x)) return false;
    }
    return true;
  }
  double max_abs() const {
    double m = 0;
    for (const auto& x : c_) m = std::max(m, abs_double(x));
    return m;
  }

  AlgCurvature& operator+=(const AlgCurvature& o) {
    require_dims(n_ == o.n_, "AlgCurvature: n mismatch");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  AlgCurvature& operator*=(const S& s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  friend AlgCurvature operator+(AlgCurvature a, const AlgCurvature& b) { return a += b; }
  friend AlgCurvature operator*(const S& s, AlgCurvature a) { return a *= s; }
  friend AlgCurvature operator-(AlgCurvature a, const AlgCurvature& b) {
    for (std::size_t i = 0; i < a.c_.size(); ++i) a.c_[i] -= b.c_[i];
    return a;
  }
  friend bool operator==(const AlgCurvature& a, const AlgCurvature& b) { return a.n_ == b.n_ && a.c_ == b.c_; }

  /// Matrix of R_{ij}: entry (l, m) is g(e_l, R_{ij} e_m).
  Vec<S> endomorphism(int i, int j) const {
    Vec<S> m(static_cast<std::size_t>(n_ * n_));
    for (int a = 0; a < n_; ++a) {
      for (int b = 0; b < n_; ++b) m[static_cast<std::size_t>(b * n_ + a)] = (*this)(i, j, a, b);
    }
    return m;
  }

 private:
  std::size_t idx(int i, int j, int k, int l) const {
    return static_cast<std::size_t>(((i * n_ + j) * n_ + k) * n_ + l);
  }

  int n_;
  Vec<S> c_;
};

/// R^E: one skew r x r matrix per ordered pair (i, j), skew in (i, j).
template <Scalar S>
class BundleCurvature {
 public:
  BundleCurvature() : BundleCurvature(2, 1) {}
  BundleCurvature(int n, int r)
      : n_(n), r_(r), m_(static_cast<std::size_t>(n * n), EMatrix<S>(r)) {
    require_dims(n >= 1 && r >= 1, "BundleCurvature requires n, r >= 1");
  }

  int n() const { return n_; }
  int rank() const { return r_; }
  const EMatrix<S>& operator()(int i, int j) const { return m_[static_cast<std::size_t>(i * n_ + j)]; }
  EMatrix<S>& operator()(int i, int j) { return m_[static_cast<std::size_t>(i * n_ + j)]; }

  /// Sets RE(i,j)_{ab} = v together with the three skew partners.
  void set_skew(int i, int j, int a, int b, const S& v) {
    (*this)(i, j)(a, b) = v;
    (*this)(i, j)(b, a) = -v;
    (*this)(j, i)(a, b) = -v;
    (*this)(j, i)(b, a) = v;
  }

  bool is_zero() const {
    for (const auto& m : m_) {
      if (!m.is_zero()) return false;
    }
    return true;
  }
  double max_abs() const {
    double out = 0;
    for (const auto& m : m_) {
      for (const auto& x : m.entries) out = std::max(out, abs_double(x));
    }
    return out;
  }
  friend bool operator==(const BundleCurvature& a, const BundleCurvature& b) {
    if (a.n_ != b.n_ || a.r_ != b.r_) return false;
    for (std::size_t i = 0; i < a.m_.size(); ++i) {
      if (a.m_[i].entries != b.m_[i].entries) return false;
    }
    return true;
  }

 private:
  int n_;
  int r_;
  std::vector<EMatrix<S>> m_;
};

struct CurvatureIssue {
  std::string what;
  double magnitude = 0;
};

/// Empty iff R has the pair symmetries and satisfies the first Bianchi identity.
template <Scalar S>
std::vector<CurvatureIssue> check_curvature(const AlgCurvature<S>& R) {
  const int n = R.n();
  double skew1 = 0, skew2 = 0, pair = 0, bianchi = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          const S& x = R(i, j, k, l);
          skew1 = std::max(skew1, abs_double(S(x + R(j, i, k, l))));
          skew2 = std::max(skew2, abs_double(S(x + R(i, j, l, k))));
          pair = std::max(pair, abs_double(S(x - R(k, l, i, j))));
          bianchi = std::max(bianchi, abs_double(S(x + R(j, k, i, l) + R(k, i, j, l))));
        }
      }
    }
  }
  std::vector<CurvatureIssue> out;
  if (skew1 > 0) out.push_back({"R(i,j,k,l) != -R(j,i,k,l)", skew1});
  if (skew2 > 0) out.push_back({"R(i,j,k,l) != -R(i,j,l,k)", skew2});
  if (pair > 0) out.push_back({"R(i,j,k,l) != R(k,l,i,j)", pair});
  if (bianchi > 0) out.push_back({"first Bianchi identity", bianchi});
  return out;
}

template <Scalar S>
std::vector<CurvatureIssue> check_bundle_curvature(const BundleCurvature<S>& RE) {
  double skew_ij = 0, skew_e = 0;
  for (int i = 0; i < RE.n(); ++i) {
    for (int j = 0; j < RE.n(); ++j) {
      for (int a = 0; a < RE.rank(); ++a) {
        for (int b = 0; b < RE.rank(); ++b) {
          skew_ij = std::max(skew_ij, abs_double(S(RE(i, j)(a, b) + RE(j, i)(a, b))));
          skew_e = std::max(skew_e, abs_double(S(RE(i, j)(a, b) + RE(i, j)(b, a))));
        }
      }
    }
  }
  std::vector<CurvatureIssue> out;
  if (skew_ij > 0) out.push_back({"RE(i,j) != -RE(j,i)", skew_ij});
  if (skew_e > 0) out.push_back({"RE(i,j) not skew-symmetric", skew_e});
  return out;
}

/// R = c id on Lambda^2.
template <Scalar S>
AlgCurvature<S> constant_curvature(int n, const S& c) {
  require_domain(n >= 2, "constant_curvature requires n >= 2");
  AlgCurvature<S> R(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      R(i, j, i, j) += c;
      R(i, j, j, i) -= c;
    }
  }
  return R;
}

/// b(R)_{ijkl} = (R_{ijkl} + R_{jkil} + R_{kijl}) / 3.
template <Scalar S>
AlgCurvature<S> bianchi_part(const AlgCurvature<S>& R) {
  const int n = R.n();
  AlgCurvature<S> B(n);
  const S third = scalar<S>(1, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) B(i, j, k, l) = third * (R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l));
      }
    }
  }
  return B;
}

/// Projection of a pair-symmetric tensor onto the kernel of the Bianchi map.
template <Scalar S>
AlgCurvature<S> bianchi_project(const AlgCurvature<S>& R) {
  return R - bianchi_part(R);
}

/// Random symmetric operator on Lambda^2 with integer entries, then Bianchi-projected.
template <Scalar S>
AlgCurvature<S> random_curvature(int n, Rng& rng) {
  require_domain(n >= 2, "random_curvature requires n >= 2");
  AlgCurvature<S> R(n);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t q = p; q < pairs.size(); ++q) {
      R.set_symmetric(pairs[p].first, pairs[p].second, pairs[q].first, pairs[q].second, random_scalar<S>(rng));
    }
  }
  return bianchi_project(R);
}

template <Scalar S>
BundleCurvature<S> random_bundle_curvature(int n, int r, Rng& rng) {
  BundleCurvature<S> RE(n, r);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int a = 0; a < r; ++a) {
        for (int b = a + 1; b < r; ++b) RE.set_skew(i, j, a, b, random_scalar<S>(rng));
      }
    }
  }
  return RE;
}

template <Scalar T>
AlgCurvature<T> convert(const AlgCurvature<Rational>& R) {
  AlgCurvature<T> out(R.n());
  const int n = R.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out(i, j, k, l) = ScalarTraits<T>::from_rational(R(i, j, k, l));
  return out;
}

template <Scalar T>
BundleCurvature<T> convert(const BundleCurvature<Rational>& RE) {
  BundleCurvature<T> out(RE.n(), RE.rank());
  for (int i = 0; i < RE.n(); ++i)
    for (int j = 0; j < RE.n(); ++j)
      for (int a = 0; a < RE.rank(); ++a)
        for (int b = 0; b < RE.rank(); ++b) out(i, j)(a, b) = ScalarTraits<T>::from_rational(RE(i, j)(a, b));
  return out;
}

}  // namespace symfiber
