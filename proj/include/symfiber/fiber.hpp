#pragma once

// Polynomial calculus on the unit sphere S^{n-1} of one tangent space.
//
// A FiberField stores an E-valued function on the sphere by its harmonic
// components: degree d maps to a trace-free TwistedTensor H_d, read as the
// polynomial v -> sum_alpha c_alpha v^alpha. Any polynomial is brought into
// this form by the standard decomposition, using |v|^2 = 1 (L acts as 1).
// The components are then the Fourier components of the field.
//
// A NormalField has one FiberField per frame index; tangency means
// sum_a v_a W_a = 0 on the sphere. Integrals are normalized by the volume of
// the sphere, so every pairing stays rational.

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "symfiber/equivariant.hpp"

namespace symfiber {

/// Average of v^alpha over the unit sphere in R^n:
/// prod (alpha_i - 1)!! / prod_{j < |alpha|/2} (n + 2j), zero if some alpha_i is odd.
template <Scalar S>
S sphere_integral(const MultiIndex& alpha) {
  const int n = alpha.size();
  require_domain(n >= 2, "sphere_integral requires n >= 2");
  for (int i = 0; i < n; ++i) {
    if (alpha[i] % 2) return scalar<S>(0);
  }
  static std::mutex mu;
  static std::map<std::vector<int>, Rational> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(alpha.entries()); it != cache.end()) return ScalarTraits<S>::from_rational(it->second);
  }
  Rational num = 1, den = 1;
  for (int i = 0; i < n; ++i) {
    for (int m = alpha[i] - 1; m > 1; m -= 2) num *= m;
  }
  for (int j = 0; j < alpha.degree() / 2; ++j) den *= n + 2 * j;
  Rational value = num / den;
  value.canonicalize();
  {
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(alpha.entries(), value);
  }
  return ScalarTraits<S>::from_rational(value);
}

template <Scalar S>
class FiberField {
 public:
  FiberField() : FiberField(2, 1) {}
  FiberField(int n, int r) : n_(n), r_(r) {
    require_domain(n >= 2, "FiberField requires n >= 2");
    require_dims(r >= 1, "FiberField requires r >= 1");
  }

  /// The restriction of the polynomial P to the sphere (pi*_k for trace-free P).
  static FiberField from_polynomial(const TwistedTensor<S>& P) {
    FiberField f(P.n(), P.rank());
    f.add_polynomial(P);
    return f;
  }
  /// A single harmonic component; H must be trace-free.
  static FiberField harmonic(const TwistedTensor<S>& H) {
    require_domain(H.is_trace_free(), "FiberField::harmonic: component is not trace-free");
    FiberField f(H.n(), H.rank());
    if (!H.is_void() && !H.is_zero()) f.comps_.emplace(H.degree(), H);
    return f;
  }

  int n() const { return n_; }
  int rank() const { return r_; }
  const std::map<int, TwistedTensor<S>>& components() const { return comps_; }

  /// Degrees with a nonzero harmonic component.
  std::vector<int> support() const {
    std::vector<int> out;
    for (const auto& [d, H] : comps_) out.push_back(d);
    return out;
  }
  int max_degree() const { return comps_.empty() ? -1 : comps_.rbegin()->first; }
  TwistedTensor<S> component(int d) const {
    auto it = comps_.find(d);
    return it == comps_.end() ? TwistedTensor<S>(n_, d, r_) : it->second;
  }

  /// Adds the restriction of an arbitrary homogeneous polynomial.
  FiberField& add_polynomial(const TwistedTensor<S>& P, const S& scale = scalar<S>(1)) {
    require_dims(P.n() == n_ && P.rank() == r_, "FiberField: shape mismatch");
    if (P.is_void() || P.is_zero()) return *this;
    for (int e = 0; e < r_; ++e) {
      if (P.slot(e).is_zero()) continue;
      const auto parts = standard_decomposition(P.slot(e));
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].is_zero()) continue;
        const int d = P.degree() - 2 * static_cast<int>(i);
        auto it = comps_.try_emplace(d, n_, d, r_).first;
        it->second.slot(e).add_scaled(scale, parts[i]);
      }
    }
    prune();
    return *this;
  }

  bool is_zero() const { return comps_.empty(); }
  double max_abs() const {
    double m = 0;
    for (const auto& [d, H] : comps_) m = std::max(m, H.max_abs());
    return m;
  }

  /// Value at a unit vector v, one entry per E basis vector.
  Vec<S> evaluate(std::type_identity_t<std::span<const S>> v) const {
    require_dims(static_cast<int>(v.size()) == n_, "FiberField::evaluate: point dimension");
    Vec<S> out(static_cast<std::size_t>(r_), scalar<S>(0));
    for (const auto& [d, H] : comps_) {
      for (int e = 0; e < r_; ++e) out[static_cast<std::size_t>(e)] += symfiber::evaluate(H.slot(e), v);
    }
    return out;
  }

  FiberField& operator+=(const FiberField& o) { return add_scaled(scalar<S>(1), o); }
  FiberField& operator-=(const FiberField& o) { return add_scaled(scalar<S>(-1), o); }
  FiberField& add_scaled(const S& s, const FiberField& o) {
    require_dims(o.n_ == n_ && o.r_ == r_, "FiberField: shape mismatch");
    for (const auto& [d, H] : o.comps_) comps_.try_emplace(d, n_, d, r_).first->second.add_scaled(s, H);
    prune();
    return *this;
  }
  FiberField& operator*=(const S& s) {
    for (auto& [d, H] : comps_) H *= s;
    prune();
    return *this;
  }
  friend FiberField operator+(FiberField a, const FiberField& b) { return a += b; }
  friend FiberField operator-(FiberField a, const FiberField& b) { return a -= b; }
  friend FiberField operator*(const S& s, FiberField a) { return a *= s; }
  friend FiberField operator-(FiberField a) { return a *= scalar<S>(-1); }
  friend bool operator==(const FiberField& a, const FiberField& b) {
    return a.n_ == b.n_ && a.r_ == b.r_ && a.comps_ == b.comps_;
  }

 private:
  void prune() {
    for (auto it = comps_.begin(); it != comps_.end();) it = it->second.is_zero() ? comps_.erase(it) : std::next(it);
  }

  int n_;
  int r_;
  std::map<int, TwistedTensor<S>> comps_;
};

/// pi*_k Psi, v -> (1/k!) g(Psi, v^k).
template <Scalar S>
FiberField<S> pullback(const TwistedTensor<S>& Psi) {
  return FiberField<S>::from_polynomial(Psi);
}

/// The degree-k Fourier component.
template <Scalar S>
FiberField<S> harmonic_projection(const FiberField<S>& f, int k) {
  FiberField<S> out(f.n(), f.rank());
  auto it = f.components().find(k);
  if (it != f.components().end()) out.add_polynomial(it->second);
  return out;
}

/// Applies a linear map of the homogeneous polynomial pieces, then re-canonicalizes.
template <Scalar S, class F>
FiberField<S> map_polynomial(const FiberField<S>& f, F&& op) {
  FiberField<S> out(f.n(), f.rank());
  for (const auto& [d, H] : f.components()) out.add_polynomial(op(H));
  return out;
}

/// v_a f
template <Scalar S>
FiberField<S> mul_coordinate(int a, const FiberField<S>& f) {
  return map_polynomial(f, [a](const TwistedTensor<S>& H) { return frame_mul(a, H); });
}

/// Pointwise product of a scalar field (r = 1) with an E-valued field.
template <Scalar S>
FiberField<S> multiply(const FiberField<S>& phi, const FiberField<S>& f) {
  require_dims(phi.rank() == 1 && phi.n() == f.n(), "multiply: first factor must be scalar-valued");
  FiberField<S> out(f.n(), f.rank());
  for (const auto& [d, P] : phi.components()) {
    for (const auto& [d2, H] : f.components()) {
      out.add_polynomial(map_slots(H, [&P](const SymTensor<S>& s) { return sym_mul(P.slot(0), s); }));
    }
  }
  return out;
}

/// The E-endomorphism M applied pointwise.
template <Scalar S>
FiberField<S> apply_e(const EMatrix<S>& M, const FiberField<S>& f) {
  return map_polynomial(f, [&M](const TwistedTensor<S>& H) { return apply_e(M, H); });
}

/// L^2 pairing over the sphere, normalized by its volume. Computed monomial by
/// monomial from sphere_integral, so orthogonality of components is a real check.
template <Scalar S>
S l2_inner(const FiberField<S>& f, const FiberField<S>& g) {
  require_dims(f.n() == g.n() && f.rank() == g.rank(), "l2_inner: shape mismatch");
  S acc = scalar<S>(0);
  for (const auto& [d1, A] : f.components()) {
    for (const auto& [d2, B] : g.components()) {
      if ((d1 + d2) % 2) continue;
      for (int e = 0; e < f.rank(); ++e) {
        const auto& a = A.slot(e);
        const auto& b = B.slot(e);
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (is_zero(a[i])) continue;
          for (std::size_t j = 0; j < b.size(); ++j) {
            if (is_zero(b[j])) continue;
            acc += a[i] * b[j] * sphere_integral<S>(a.basis()[i] + b.basis()[j]);
          }
        }
      }
    }
  }
  return acc;
}

/// T-valued fiber field, one FiberField per frame index.
template <Scalar S>
class NormalField {
 public:
  NormalField() = default;
  NormalField(int n, int r) : comps_(static_cast<std::size_t>(n), FiberField<S>(n, r)) {}
  explicit NormalField(std::vector<FiberField<S>> comps) : comps_(std::move(comps)) {
    require_dims(!comps_.empty() && static_cast<int>(comps_.size()) == comps_[0].n(),
                 "NormalField: need exactly n components");
  }

  int n() const { return comps_[0].n(); }
  int rank() const { return comps_[0].rank(); }
  const FiberField<S>& comp(int a) const { return comps_[static_cast<std::size_t>(a)]; }
  FiberField<S>& comp(int a) { return comps_[static_cast<std::size_t>(a)]; }
  const std::vector<FiberField<S>>& comps() const { return comps_; }

  /// sum_a v_a W_a, the radial part.
  FiberField<S> radial() const {
    FiberField<S> out(n(), rank());
    for (int a = 0; a < n(); ++a) out += mul_coordinate(a, comp(a));
    return out;
  }
  bool is_tangent() const { return radial().is_zero(); }
  bool is_zero() const {
    for (const auto& c : comps_) {
      if (!c.is_zero()) return false;
    }
    return true;
  }
  double max_abs() const {
    double m = 0;
    for (const auto& c : comps_) m = std::max(m, c.max_abs());
    return m;
  }
  int max_degree() const {
    int m = -1;
    for (const auto& c : comps_) m = std::max(m, c.max_degree());
    return m;
  }

  NormalField& operator+=(const NormalField& o) { return add_scaled(scalar<S>(1), o); }
  NormalField& operator-=(const NormalField& o) { return add_scaled(scalar<S>(-1), o); }
  NormalField& add_scaled(const S& s, const NormalField& o) {
    require_dims(o.comps_.size() == comps_.size(), "NormalField: n mismatch");
    for (std::size_t a = 0; a < comps_.size(); ++a) comps_[a].add_scaled(s, o.comps_[a]);
    return *this;
  }
  NormalField& operator*=(const S& s) {
    for (auto& c : comps_) c *= s;
    return *this;
  }
  friend NormalField operator+(NormalField a, const NormalField& b) { return a += b; }
  friend NormalField operator-(NormalField a, const NormalField& b) { return a -= b; }
  friend NormalField operator*(const S& s, NormalField a) { return a *= s; }
  friend bool operator==(const NormalField& a, const NormalField& b) { return a.comps_ == b.comps_; }

 private:
  std::vector<FiberField<S>> comps_;
};

template <Scalar S>
S l2_inner(const NormalField<S>& W, const NormalField<S>& U) {
  require_dims(W.n() == U.n(), "l2_inner: n mismatch");
  S acc = scalar<S>(0);
  for (int a = 0; a < W.n(); ++a) acc += l2_inner(W.comp(a), U.comp(a));
  return acc;
}

/// pi_N W = W - v <W, v>.
template <Scalar S>
NormalField<S> tangent_projection(const NormalField<S>& W) {
  const FiberField<S> rad = W.radial();
  NormalField<S> out = W;
  for (int a = 0; a < W.n(); ++a) out.comp(a) -= mul_coordinate(a, rad);
  return out;
}

/// w (x) f for a constant vector w (not projected).
template <Scalar S>
NormalField<S> constant_times(std::type_identity_t<std::span<const S>> w, const FiberField<S>& f) {
  NormalField<S> out(f.n(), f.rank());
  for (int a = 0; a < f.n(); ++a) out.comp(a) = w[static_cast<std::size_t>(a)] * f;
  return out;
}

/// Per-index pullback of a T-valued tensor: component a is pi*(W_a).
template <Scalar S>
NormalField<S> pullback(const VectorTwistedTensor<S>& W) {
  std::vector<FiberField<S>> comps;
  for (int a = 0; a < W.n(); ++a) comps.push_back(pullback(W.comp(a)));
  return NormalField<S>(std::move(comps));
}

/// Gradient along the sphere: on a degree-d harmonic piece H, (grad H)_a = e_a _| H - d v_a H.
template <Scalar S>
NormalField<S> vertical_gradient(const FiberField<S>& f) {
  NormalField<S> out(f.n(), f.rank());
  for (const auto& [d, H] : f.components()) {
    if (d == 0) continue;
    for (int a = 0; a < f.n(); ++a) {
      out.comp(a).add_polynomial(frame_contract(a, H));
      out.comp(a).add_polynomial(frame_mul(a, H), scalar<S>(-d));
    }
  }
  return out;
}

/// nabla_V* W = - sum_a d_a W_a + sum_a v_a (v . d) W_a, the divergence of the
/// pullback connection along an orthonormal frame of v^perp. On tangent W this
/// is the L^2 adjoint of vertical_gradient; on a general T-valued W the adjoint
/// has the extra term (n-1) <W, v>.
template <Scalar S>
FiberField<S> vertical_div_star(const NormalField<S>& W) {
  FiberField<S> out(W.n(), W.rank());
  for (int a = 0; a < W.n(); ++a) {
    for (const auto& [d, H] : W.comp(a).components()) {
      if (d >= 1) out.add_polynomial(frame_contract(a, H), scalar<S>(-1));
      if (d >= 1) out.add_polynomial(frame_mul(a, H), scalar<S>(d));
    }
  }
  return out;
}

/// The L^2 adjoint of vertical_gradient on arbitrary T-valued fields.
template <Scalar S>
FiberField<S> vertical_adjoint(const NormalField<S>& W) {
  return vertical_div_star(W) + scalar<S>(W.n() - 1) * W.radial();
}

/// Delta = nabla_V* nabla_V, computed through the divergence formula.
template <Scalar S>
FiberField<S> vertical_laplacian(const FiberField<S>& f) {
  return vertical_div_star(vertical_gradient(f));
}

/// S_k Psi = sum_i (e_i _| Psi) (x) e_i.
template <Scalar S>
VectorTwistedTensor<S> s_k_map(const TwistedTensor<S>& Psi) {
  require_domain(Psi.degree() >= 1, "S_k needs k >= 1");
  return q1_star(Psi);
}

/// Splits pi*_{k-1} S_k Psi into its tangential part and the radial part k pi*_k Psi v.
template <Scalar S>
struct KpSplit {
  NormalField<S> full;
  NormalField<S> tangential;
  NormalField<S> radial;
};

template <Scalar S>
KpSplit<S> eq_kp_split(const TwistedTensor<S>& Psi) {
  KpSplit<S> out;
  out.full = pullback(s_k_map(Psi));
  out.tangential = tangent_projection(out.full);
  out.radial = out.full - out.tangential;
  return out;
}

/// Closed form for nabla_V*(w (x) pi*_k(K (x) xi)): -pi*_{k-1}((w _| K) (x) xi) + k pi*_{k+1}((w . K) (x) xi).
template <Scalar S>
FiberField<S> vertical_div_star_decomposable(std::type_identity_t<std::span<const S>> w, const TwistedTensor<S>& Psi) {
  require_domain(Psi.is_trace_free(), "vertical_div_star_decomposable: K must be trace-free");
  FiberField<S> out(Psi.n(), Psi.rank());
  const int k = Psi.degree();
  if (k >= 1) {
    out.add_polynomial(map_slots(Psi, [&](const SymTensor<S>& s) { return contract(w, s); }), scalar<S>(-1));
  }
  out.add_polynomial(map_slots(Psi, [&](const SymTensor<S>& s) { return vec_mul(w, s); }), scalar<S>(k));
  return out;
}

template <Scalar T>
FiberField<T> convert(const FiberField<Rational>& f) {
  FiberField<T> out(f.n(), f.rank());
  for (const auto& [d, H] : f.components()) out.add_polynomial(convert<T>(H));
  return out;
}

}  // namespace symfiber
