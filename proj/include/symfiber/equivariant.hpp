#pragma once

// SO(n)-equivariant maps on T (x) Sym^k_0 T (x) E and the curvature
// endomorphisms built from the so(n) action.

#include <string>
#include <string_view>

#include "symfiber/curvature.hpp"

namespace symfiber {

/// (e_i ^ e_j)_* K = e_j . (e_i _| K) - e_i . (e_j _| K).
template <Scalar S>
SymTensor<S> wedge_action(int i, int j, const SymTensor<S>& K) {
  require_dims(i >= 0 && i < K.n() && j >= 0 && j < K.n(), "wedge_action: frame index out of range");
  if (i == j || K.degree() <= 0) return SymTensor<S>(K.n(), K.degree());
  SymTensor<S> out = frame_mul(j, frame_contract(i, K));
  out -= frame_mul(i, frame_contract(j, K));
  return out;
}

template <Scalar S>
TwistedTensor<S> wedge_action(int i, int j, const TwistedTensor<S>& T) {
  return map_slots(T, [i, j](const SymTensor<S>& s) { return wedge_action(i, j, s); });
}

/// A_* K = sum_m (A e_m) . (e_m _| K) for a skew matrix A with A(l, m) = g(e_l, A e_m).
template <Scalar S>
SymTensor<S> skew_action(std::type_identity_t<std::span<const S>> A, const SymTensor<S>& K) {
  const int n = K.n();
  require_dims(A.size() == static_cast<std::size_t>(n * n), "skew_action: matrix size");
  SymTensor<S> out(n, K.degree());
  if (K.degree() <= 0) return out;
  Vec<S> col(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    bool any = false;
    for (int l = 0; l < n; ++l) {
      col[static_cast<std::size_t>(l)] = A[static_cast<std::size_t>(l * n + m)];
      any = any || !is_zero(col[static_cast<std::size_t>(l)]);
    }
    if (any) out += vec_mul(std::span<const S>(col), frame_contract(m, K));
  }
  return out;
}

/// (R_{ij})_* K.
template <Scalar S>
SymTensor<S> curvature_action(const AlgCurvature<S>& R, int i, int j, const SymTensor<S>& K) {
  const Vec<S> A = R.endomorphism(i, j);
  return skew_action(std::span<const S>(A), K);
}

template <Scalar S>
TwistedTensor<S> curvature_action(const AlgCurvature<S>& R, int i, int j, const TwistedTensor<S>& T) {
  const Vec<S> A = R.endomorphism(i, j);
  return map_slots(T, [&A](const SymTensor<S>& s) { return skew_action(std::span<const S>(A), s); });
}

/// R_{ij} acting on Sym (x) E: the Sym slot through R, the E slot through RE.
template <Scalar S>
TwistedTensor<S> full_curvature_action(const AlgCurvature<S>& R, const BundleCurvature<S>& RE, int i, int j,
                                       const TwistedTensor<S>& T) {
  TwistedTensor<S> out = curvature_action(R, i, j, T);
  if (!RE(i, j).is_zero()) out += apply_e(RE(i, j), T);
  return out;
}

/// q(R) K = 1/2 sum_{ij} (e_i ^ e_j)_* (R_{ij})_* K.
template <Scalar S>
SymTensor<S> q_R(const AlgCurvature<S>& R, const SymTensor<S>& K) {
  require_dims(R.n() == K.n(), "q_R: dimension mismatch");
  SymTensor<S> out(K.n(), K.degree());
  for (int i = 0; i < K.n(); ++i) {
    for (int j = i + 1; j < K.n(); ++j) out += wedge_action(i, j, curvature_action(R, i, j, K));
  }
  return out;
}

/// q(R) K = - sum_{ijm} (R_{ij} e_m) _| (e_j . e_m . (e_i _| K)).
template <Scalar S>
SymTensor<S> q_R_frame_formula(const AlgCurvature<S>& R, const SymTensor<S>& K) {
  const int n = K.n();
  require_dims(R.n() == n, "q_R_frame_formula: dimension mismatch");
  SymTensor<S> out(n, K.degree());
  if (K.degree() <= 0) return out;
  Vec<S> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const SymTensor<S> ci = frame_contract(i, K);
    for (int m = 0; m < n; ++m) {
      const SymTensor<S> cm = frame_mul(m, ci);
      for (int j = 0; j < n; ++j) {
        bool any = false;
        for (int l = 0; l < n; ++l) {
          w[static_cast<std::size_t>(l)] = R(i, j, m, l);
          any = any || !is_zero(w[static_cast<std::size_t>(l)]);
        }
        if (!any) continue;
        out -= contract(std::span<const S>(w), frame_mul(j, cm));
      }
    }
  }
  return out;
}

template <Scalar S>
TwistedTensor<S> q_R(const AlgCurvature<S>& R, const TwistedTensor<S>& T) {
  return map_slots(T, [&R](const SymTensor<S>& s) { return q_R(R, s); });
}

template <Scalar S>
TwistedTensor<S> q_R_frame_formula(const AlgCurvature<S>& R, const TwistedTensor<S>& T) {
  return map_slots(T, [&R](const SymTensor<S>& s) { return q_R_frame_formula(R, s); });
}

/// The E-coupling part of q(R)^E: 1/2 sum_{ij} (e_i ^ e_j)_* Psi (x) RE_{ij}.
template <Scalar S>
TwistedTensor<S> q_E_part(const BundleCurvature<S>& RE, const TwistedTensor<S>& T) {
  require_dims(RE.n() == T.n() && RE.rank() == T.rank(), "q_E_part: shape mismatch");
  TwistedTensor<S> out(T.n(), T.degree(), T.rank());
  for (int i = 0; i < T.n(); ++i) {
    for (int j = i + 1; j < T.n(); ++j) {
      if (!RE(i, j).is_zero()) out += apply_e(RE(i, j), wedge_action(i, j, T));
    }
  }
  return out;
}

/// q(R)^E Psi = q(R) Psi + 1/2 sum_{ij} (e_i ^ e_j)_* Psi (x) RE_{ij}.
template <Scalar S>
TwistedTensor<S> q_R_E(const AlgCurvature<S>& R, const BundleCurvature<S>& RE, const TwistedTensor<S>& T) {
  require_dims(R.n() == T.n(), "q_R_E: dimension mismatch");
  return q_R(R, T) + q_E_part(RE, T);
}

// ---- q1, q2 and the projections -------------------------------------------

/// q1(W) = sum_i (e_i . W_i)_0.
template <Scalar S>
TwistedTensor<S> q1(const VectorTwistedTensor<S>& W) {
  TwistedTensor<S> out(W.n(), W.degree() + 1, W.rank());
  for (int i = 0; i < W.n(); ++i) out += frame_mul0(i, W.comp(i));
  return out;
}

/// q1*(K) = sum_i e_i (x) (e_i _| K).
template <Scalar S>
VectorTwistedTensor<S> q1_star(const TwistedTensor<S>& K) {
  require_dims(K.degree() >= 1, "q1_star: degree must be >= 1");
  std::vector<TwistedTensor<S>> comps;
  for (int i = 0; i < K.n(); ++i) comps.push_back(frame_contract(i, K));
  return VectorTwistedTensor<S>(std::move(comps));
}

/// q2(W) = sum_i e_i _| W_i.
template <Scalar S>
TwistedTensor<S> q2(const VectorTwistedTensor<S>& W) {
  require_dims(W.degree() >= 1, "q2: degree must be >= 1");
  TwistedTensor<S> out(W.n(), W.degree() - 1, W.rank());
  for (int i = 0; i < W.n(); ++i) out += frame_contract(i, W.comp(i));
  return out;
}

/// q2*(K) = sum_i e_i (x) (e_i . K - 1/(n+2k-4) L(e_i _| K)), K of degree k-1.
template <Scalar S>
VectorTwistedTensor<S> q2_star(const TwistedTensor<S>& K) {
  const int k = K.degree() + 1;
  require_domain(K.n() + 2 * k - 4 != 0, "q2_star: n + 2k - 4 = 0");
  std::vector<TwistedTensor<S>> comps;
  for (int i = 0; i < K.n(); ++i) comps.push_back(frame_mul0(i, K));
  return VectorTwistedTensor<S>(std::move(comps));
}

inline void require_projection_domain(int n, int k) {
  require_domain(n >= 3 && k >= 1,
                 "projections p2/p3 need n >= 3 and k >= 1 (got n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
}

template <Scalar S>
VectorTwistedTensor<S> p1(const VectorTwistedTensor<S>& W) {
  const int k = W.degree();
  require_domain(W.n() + 2 * k - 2 != 0, "p1: n + 2k - 2 = 0");
  return S(scalar<S>(1, k + 1)) * q1_star(q1(W));
}

/// Normalization (n+2k-4) / ((n+2k-2)(n+k-3)).
template <Scalar S>
S p2_factor(int n, int k) {
  return scalar<S>(n + 2 * k - 4, static_cast<long>(n + 2 * k - 2) * (n + k - 3));
}

template <Scalar S>
VectorTwistedTensor<S> p2(const VectorTwistedTensor<S>& W) {
  require_projection_domain(W.n(), W.degree());
  return p2_factor<S>(W.n(), W.degree()) * q2_star(q2(W));
}

template <Scalar S>
VectorTwistedTensor<S> p3(const VectorTwistedTensor<S>& W) {
  require_projection_domain(W.n(), W.degree());
  return W - p1(W) - p2(W);
}

/// B(b (x) v) = sum_l e_l (x) (e_l ^ b)_* v.
template <Scalar S>
VectorTwistedTensor<S> conf_weight_B(const VectorTwistedTensor<S>& W) {
  VectorTwistedTensor<S> out(W.n(), W.degree(), W.rank());
  for (int l = 0; l < W.n(); ++l) {
    for (int b = 0; b < W.n(); ++b) {
      if (l != b) out.comp(l) += wedge_action(l, b, W.comp(b));
    }
  }
  return out;
}

enum class EquivariantMap { identity, p1, p2, p3, B };

inline std::string_view map_name(EquivariantMap p) {
  switch (p) {
    case EquivariantMap::identity: return "id";
    case EquivariantMap::p1: return "p1";
    case EquivariantMap::p2: return "p2";
    case EquivariantMap::p3: return "p3";
    case EquivariantMap::B: return "B";
  }
  return "?";
}

inline EquivariantMap parse_map(std::string_view s) {
  for (auto p : {EquivariantMap::identity, EquivariantMap::p1, EquivariantMap::p2, EquivariantMap::p3, EquivariantMap::B}) {
    if (map_name(p) == s) return p;
  }
  throw UsageError("unregistered equivariant map '" + std::string(s) + "'");
}

template <Scalar S>
VectorTwistedTensor<S> apply_map(EquivariantMap p, const VectorTwistedTensor<S>& W) {
  switch (p) {
    case EquivariantMap::identity: return W;
    case EquivariantMap::p1: return p1(W);
    case EquivariantMap::p2: return p2(W);
    case EquivariantMap::p3: return p3(W);
    case EquivariantMap::B: return conf_weight_B(W);
  }
  throw UsageError("unregistered equivariant map");
}

/// p~(a (x) b (x) v) = (a _| (x) id) p(b (x) v).
template <Scalar S>
TwistedTensor<S> tilde_apply(EquivariantMap p, int a, int b, const TwistedTensor<S>& V) {
  return apply_map(p, VectorTwistedTensor<S>::frame_tensor(b, V)).comp(a);
}

}  // namespace symfiber
