#pragma once

// Operators on the unit sphere bundle, evaluated over one base point x.
//
// A field on SM near the fiber S_x is modelled by its fiber polynomial plus its
// horizontal derivatives: d[j] is the derivative along the horizontal lift of
// e_j and dd[j*n + a] the second derivative d_j d_a. Pulling back a 2-jet gives
// exactly this data (pi* commutes with covariant derivatives), and horizontal
// derivatives commute with everything that is algebraic in v. So X, X+-, Z_k,
// Z_k* and the ladders are all algebra on fiber polynomials.

#include <vector>

#include "symfiber/diffops.hpp"
#include "symfiber/fiber.hpp"

namespace symfiber {

template <Scalar S>
struct FiberJet1 {
  FiberField<S> value;
  std::vector<FiberField<S>> d;  // n entries
};

template <Scalar S>
struct FiberJet2 {
  FiberField<S> value;
  std::vector<FiberField<S>> d;   // n entries
  std::vector<FiberField<S>> dd;  // n*n entries, dd[j*n + a] = d_j d_a
};

template <Scalar S>
struct NormalJet1 {
  NormalField<S> value;
  std::vector<NormalField<S>> d;
};

/// pi* of the jet, with its horizontal derivatives.
template <Scalar S>
FiberJet2<S> lift(const SectionJet2<S>& J) {
  FiberJet2<S> f;
  f.value = pullback(J.K);
  for (const auto& t : J.dK) f.d.push_back(pullback(t));
  for (const auto& t : J.d2K) f.dd.push_back(pullback(t));
  return f;
}

template <Scalar S>
FiberJet1<S> harmonic_projection(const FiberJet1<S>& f, int k) {
  FiberJet1<S> out{harmonic_projection(f.value, k), {}};
  for (const auto& x : f.d) out.d.push_back(harmonic_projection(x, k));
  return out;
}

namespace detail {

/// sum_a v_a g_a
template <Scalar S>
FiberField<S> contract_v(const FiberField<S>* g, int n) {
  FiberField<S> out(g[0].n(), g[0].rank());
  for (int a = 0; a < n; ++a) out += mul_coordinate(a, g[a]);
  return out;
}

}  // namespace detail

/// X f = sum_a v_a d_a f; its horizontal derivatives come from dd.
template <Scalar S>
FiberJet1<S> apply_X(const FiberJet2<S>& f) {
  const int n = f.value.n();
  FiberJet1<S> out{detail::contract_v(f.d.data(), n), {}};
  for (int j = 0; j < n; ++j) out.d.push_back(detail::contract_v(f.dd.data() + j * n, n));
  return out;
}

template <Scalar S>
FiberField<S> apply_X(const FiberJet1<S>& f) {
  return detail::contract_v(f.d.data(), f.value.n());
}

template <Scalar S>
FiberField<S> op_X(const SectionJet2<S>& J) {
  return apply_X(lift(J)).value;
}

template <Scalar S>
FiberField<S> op_X_plus(const SectionJet2<S>& J) {
  return harmonic_projection(op_X(J), J.k + 1);
}

template <Scalar S>
FiberField<S> op_X_minus(const SectionJet2<S>& J) {
  return harmonic_projection(op_X(J), J.k - 1);
}

/// X_- X_+ f and X_+ X_- f on degree-k input; the inner X carries its derivatives.
template <Scalar S>
FiberField<S> ladder_minus_plus(const SectionJet2<S>& J) {
  const FiberJet1<S> xp = harmonic_projection(apply_X(lift(J)), J.k + 1);
  return harmonic_projection(apply_X(xp), J.k);
}

template <Scalar S>
FiberField<S> ladder_plus_minus(const SectionJet2<S>& J) {
  const FiberJet1<S> xm = harmonic_projection(apply_X(lift(J)), J.k - 1);
  return harmonic_projection(apply_X(xm), J.k);
}

/// nabla_H f = pi_N sum_a e_a (x) d_a f.
template <Scalar S>
NormalField<S> nabla_H(const FiberJet1<S>& f) {
  return tangent_projection(NormalField<S>(f.d));
}

template <Scalar S>
NormalJet1<S> nabla_H(const FiberJet2<S>& f) {
  const int n = f.value.n();
  NormalJet1<S> out{tangent_projection(NormalField<S>(f.d)), {}};
  for (int j = 0; j < n; ++j) {
    std::vector<FiberField<S>> row(f.dd.begin() + j * n, f.dd.begin() + (j + 1) * n);
    out.d.push_back(tangent_projection(NormalField<S>(std::move(row))));
  }
  return out;
}

template <Scalar S>
NormalField<S> nabla_H(const SectionJet2<S>& J) {
  return nabla_H(FiberJet1<S>{pullback(J.K), lift(J).d});
}

template <Scalar S>
NormalJet1<S> vertical_gradient(const FiberJet1<S>& f) {
  NormalJet1<S> out{vertical_gradient(f.value), {}};
  for (const auto& x : f.d) out.d.push_back(vertical_gradient(x));
  return out;
}

template <Scalar S>
FiberJet1<S> vertical_div_star(const NormalJet1<S>& W) {
  FiberJet1<S> out{vertical_div_star(W.value), {}};
  for (const auto& x : W.d) out.d.push_back(vertical_div_star(x));
  return out;
}

inline void require_pestov_domain(int n, int k) {
  require_projection_domain(n, k);
  require_domain(n + k != 3, "Z_k needs n + k != 3");
}

/// Z_k f = nabla_H f - 1/(k+1) nabla_V X_+ f + 1/(n+k-3) nabla_V X_- f, with its derivatives.
template <Scalar S>
NormalJet1<S> apply_Z(const FiberJet2<S>& f, int k) {
  const int n = f.value.n();
  require_pestov_domain(n, k);
  const FiberJet1<S> x = apply_X(f);
  const NormalJet1<S> gp = vertical_gradient(harmonic_projection(x, k + 1));
  const NormalJet1<S> gm = vertical_gradient(harmonic_projection(x, k - 1));
  NormalJet1<S> out = nabla_H(f);
  const S a = scalar<S>(-1, k + 1);
  const S b = scalar<S>(1, n + k - 3);
  out.value.add_scaled(a, gp.value);
  out.value.add_scaled(b, gm.value);
  for (int j = 0; j < n; ++j) {
    out.d[static_cast<std::size_t>(j)].add_scaled(a, gp.d[static_cast<std::size_t>(j)]);
    out.d[static_cast<std::size_t>(j)].add_scaled(b, gm.d[static_cast<std::size_t>(j)]);
  }
  return out;
}

template <Scalar S>
NormalField<S> op_Z(const SectionJet2<S>& J) {
  return apply_Z(lift(J), J.k).value;
}

/// Z_k* W = pi_k [nabla_H* W + 1/(k+1) X pi_{k+1} nabla_V* W - 1/(n+k-3) X pi_{k-1} nabla_V* W],
/// with nabla_H* W = - sum_j (d_j W)_j and X_+* = -X_-, X_-* = -X_+.
template <Scalar S>
FiberField<S> apply_Z_star(const NormalJet1<S>& W, int k) {
  const int n = W.value.n();
  require_pestov_domain(n, k);
  FiberField<S> out(n, W.value.rank());
  for (int j = 0; j < n; ++j) out -= W.d[static_cast<std::size_t>(j)].comp(j);
  const FiberJet1<S> u = vertical_div_star(W);
  out.add_scaled(scalar<S>(1, k + 1), apply_X(harmonic_projection(u, k + 1)));
  out.add_scaled(scalar<S>(-1, n + k - 3), apply_X(harmonic_projection(u, k - 1)));
  return harmonic_projection(out, k);
}

/// (R W)_l = sum R(a,b,m,l) v_b v_m W_a, i.e. R_{w,v} v.
template <Scalar S>
NormalField<S> calligraphic_R(const NormalField<S>& W, const AlgCurvature<S>& R) {
  const int n = W.n();
  require_dims(R.n() == n, "calligraphic_R: dimension mismatch");
  NormalField<S> out(n, W.rank());
  for (int a = 0; a < n; ++a) {
    if (W.comp(a).is_zero()) continue;
    for (int l = 0; l < n; ++l) {
      SymTensor<S> q(n, 2);
      for (int b = 0; b < n; ++b) {
        for (int m = 0; m < n; ++m) {
          const S& c = R(a, b, m, l);
          if (!is_zero(c)) q.add_scaled(c, frame_mul(b, SymTensor<S>::frame(n, m)));
        }
      }
      if (q.is_zero()) continue;
      out.comp(l) += multiply(pullback(TwistedTensor<S>::untwisted(q)), W.comp(a));
    }
  }
  return out;
}

/// (F psi)_l = sum_b v_b RE(b, l) psi, i.e. sum_i e_i^perp (x) RE_{v, e_i} psi.
template <Scalar S>
NormalField<S> script_F(const FiberField<S>& psi, const BundleCurvature<S>& RE) {
  const int n = psi.n();
  require_dims(RE.n() == n && RE.rank() == psi.rank(), "script_F: shape mismatch");
  NormalField<S> out(n, psi.rank());
  for (int l = 0; l < n; ++l) {
    for (int b = 0; b < n; ++b) {
      if (b == l || RE(b, l).is_zero()) continue;
      out.comp(l) += mul_coordinate(b, apply_e(RE(b, l), psi));
    }
  }
  return out;
}

/// Both sides of the two curvature identities on pi*_k Psi.
template <Scalar S>
struct LinkFReport {
  FiberField<S> r_lhs, r_rhs;  // nabla_V* R nabla_V pi*Psi, pi*(q(R) Psi)
  FiberField<S> f_lhs, f_rhs;  // nabla_V* F pi*Psi, pi*(E-part of q(R)^E Psi)
  bool r_holds() const { return r_lhs == r_rhs; }
  bool f_holds() const { return f_lhs == f_rhs; }
};

template <Scalar S>
LinkFReport<S> link_f_check(const SectionJet2<S>& J) {
  const FiberField<S> f = pullback(J.K);
  LinkFReport<S> rep;
  rep.r_lhs = vertical_div_star(calligraphic_R(vertical_gradient(f), J.R));
  rep.r_rhs = pullback(q_R(J.R, J.K));
  rep.f_lhs = vertical_div_star(script_F(f, J.RE));
  rep.f_rhs = pullback(q_E_part(J.RE, J.K));
  return rep;
}

/// X_- X_+ and X_+ X_- on pi*_k K, as used on the right of the localized identity.
template <Scalar S>
std::pair<FiberField<S>, FiberField<S>> second_order_fiber(const SectionJet2<S>& J) {
  return {ladder_minus_plus(J), ladder_plus_minus(J)};
}

template <Scalar S>
struct PestovCoefficients {
  S curvature_R;  // 1
  S curvature_F;  // 1
  S minus_plus;   // k(n+2k)/(k+1)
  S plus_minus;   // -(n+k-2)(n+2k-4)/(n+k-3)
  S z_star_z;     // 1

  static PestovCoefficients make(int n, int k) {
    require_pestov_domain(n, k);
    const Rational mp = Rational(k * (n + 2 * k)) / Rational(k + 1);
    const Rational pm = -Rational((n + k - 2) * (n + 2 * k - 4)) / Rational(n + k - 3);
    return {scalar<S>(1), scalar<S>(1), ScalarTraits<S>::from_rational(mp), ScalarTraits<S>::from_rational(pm),
            scalar<S>(1)};
  }
};

/// The five operator terms of the localized identity applied to pi*_k K.
template <Scalar S>
struct PestovTerms {
  FiberField<S> curvature_R;  // nabla_V* R nabla_V f
  FiberField<S> curvature_F;  // nabla_V* F f
  FiberField<S> minus_plus;   // X_- X_+ f
  FiberField<S> plus_minus;   // X_+ X_- f
  FiberField<S> z_star_z;     // Z_k* Z_k f
};

template <Scalar S>
PestovTerms<S> pestov_terms(const SectionJet2<S>& J) {
  require_pestov_domain(J.n, J.k);
  const FiberJet2<S> f = lift(J);
  PestovTerms<S> t;
  t.curvature_R = vertical_div_star(calligraphic_R(vertical_gradient(f.value), J.R));
  t.curvature_F = vertical_div_star(script_F(f.value, J.RE));
  t.minus_plus = ladder_minus_plus(J);
  t.plus_minus = ladder_plus_minus(J);
  t.z_star_z = apply_Z_star(apply_Z(f, J.k), J.k);
  return t;
}

template <Scalar S>
struct PestovResult {
  FiberField<S> residual;
  FiberField<S> lhs;
  FiberField<S> rhs;
  double max_abs = 0;
  double scale = 0;  // largest term norm
};

/// residual = [c_R nabla_V* R nabla_V + c_F nabla_V* F] f - [a X_- X_+ + b X_+ X_- + c_Z Z_k* Z_k] f.
template <Scalar S>
PestovResult<S> combine(const PestovTerms<S>& t, const PestovCoefficients<S>& c) {
  PestovResult<S> res;
  res.lhs = c.curvature_R * t.curvature_R;
  res.lhs.add_scaled(c.curvature_F, t.curvature_F);
  res.rhs = c.minus_plus * t.minus_plus;
  res.rhs.add_scaled(c.plus_minus, t.plus_minus);
  res.rhs.add_scaled(c.z_star_z, t.z_star_z);
  res.residual = res.lhs - res.rhs;
  res.max_abs = res.residual.max_abs();
  res.scale = std::max({t.curvature_R.max_abs(), t.curvature_F.max_abs(), t.minus_plus.max_abs(),
                        t.plus_minus.max_abs(), t.z_star_z.max_abs()});
  return res;
}

template <Scalar S>
PestovResult<S> pestov_residual(const SectionJet2<S>& J, const PestovCoefficients<S>* coeffs = nullptr) {
  const auto c = coeffs ? *coeffs : PestovCoefficients<S>::make(J.n, J.k);
  return combine(pestov_terms(J), c);
}

}  // namespace symfiber
