#pragma once

// First-order operators and second-order composites evaluated on 2-jets.
// Nothing here differentiates: a jet already carries nabla K and nabla^2 K, and
// every operator is an algebraic expression in them.

#include <algorithm>
#include <cmath>

#include "symfiber/jet.hpp"

namespace symfiber {

/// D K = sum_i e_i . nabla_i K.
template <Scalar S>
TwistedTensor<S> op_D(const SectionJet2<S>& J) {
  TwistedTensor<S> out(J.n, J.k + 1, J.r);
  for (int i = 0; i < J.n; ++i) out += frame_mul(i, J.d1(i));
  return out;
}

/// D* K = - sum_i e_i _| nabla_i K.
template <Scalar S>
TwistedTensor<S> op_D_star(const SectionJet2<S>& J) {
  TwistedTensor<S> out(J.n, J.k - 1, J.r);
  for (int i = 0; i < J.n; ++i) out -= frame_contract(i, J.d1(i));
  return out;
}

/// D0 K = D K + 1/(n+2k-2) L D* K.
template <Scalar S>
TwistedTensor<S> op_D0(const SectionJet2<S>& J) {
  const int denom = J.n + 2 * J.k - 2;
  require_domain(denom != 0, "D0: n + 2k - 2 = 0");
  TwistedTensor<S> out = op_D(J);
  if (J.k >= 1) out.add_scaled(S(scalar<S>(1, denom)), l_op(op_D_star(J)));
  return out;
}

/// D0* is the restriction of D* to trace-free tensors.
template <Scalar S>
TwistedTensor<S> op_D0_star(const SectionJet2<S>& J) {
  require_domain(J.k >= 1, "D0*: k must be >= 1");
  return op_D_star(J);
}

/// P_s = p_s nabla.
template <Scalar S>
VectorTwistedTensor<S> op_P(int s, const SectionJet2<S>& J) {
  require_projection_domain(J.n, J.k);
  const VectorTwistedTensor<S> grad = J.gradient();
  switch (s) {
    case 1: return p1(grad);
    case 2: return p2(grad);
    case 3: return p3(grad);
    default: throw UsageError("op_P: projector index must be 1, 2 or 3");
  }
}

/// p~ nabla^2 = sum_i [p(sum_j e_j (x) nabla^2_{ij} K)]_i.
template <Scalar S>
TwistedTensor<S> second_order(EquivariantMap p, const SectionJet2<S>& J) {
  TwistedTensor<S> out(J.n, J.k, J.r);
  for (int i = 0; i < J.n; ++i) out += apply_map(p, J.hessian_row(i)).comp(i);
  return out;
}

/// D0* D0 K = - sum_j e_j _| (sum_i e_i . nabla^2_{ji} K)_0.
template <Scalar S>
TwistedTensor<S> d0_star_d0(const SectionJet2<S>& J) {
  TwistedTensor<S> out(J.n, J.k, J.r);
  for (int j = 0; j < J.n; ++j) {
    TwistedTensor<S> inner_sum(J.n, J.k + 1, J.r);
    for (int i = 0; i < J.n; ++i) inner_sum += frame_mul0(i, J.d2(j, i));
    out -= frame_contract(j, inner_sum);
  }
  return out;
}

/// D0 D0* K = (sum_j e_j . nabla_j D* K)_0 with nabla_j D* K = - sum_i e_i _| nabla^2_{ji} K.
template <Scalar S>
TwistedTensor<S> d0_d0_star(const SectionJet2<S>& J) {
  require_domain(J.k >= 1, "D0 D0*: k must be >= 1");
  TwistedTensor<S> out(J.n, J.k, J.r);
  for (int j = 0; j < J.n; ++j) {
    TwistedTensor<S> div(J.n, J.k - 1, J.r);
    for (int i = 0; i < J.n; ++i) div -= frame_contract(i, J.d2(j, i));
    out += frame_mul0(j, div);
  }
  return out;
}

/// Exact coefficients of the twisted Weitzenboeck formula at (n, k).
template <Scalar S>
struct WeitzenbockCoefficients {
  S d0_star_d0;  // -k/(k+1)
  S d0_d0_star;  // (n+k-2)(n+2k-4) / ((n+2k-2)(n+k-3))
  S p3_star_p3;  // 1

  static WeitzenbockCoefficients make(int n, int k) {
    require_projection_domain(n, k);
    require_domain(n + 2 * k - 2 != 0 && n + k - 3 != 0, "Weitzenboeck coefficients: vanishing denominator");
    const Rational a(-k, k + 1);
    const Rational b = Rational((n + k - 2) * (n + 2 * k - 4)) / Rational((n + 2 * k - 2) * (n + k - 3));
    return {ScalarTraits<S>::from_rational(a), ScalarTraits<S>::from_rational(b), scalar<S>(1)};
  }
};

template <Scalar S>
struct WeitzenbockTerms {
  TwistedTensor<S> curvature;     // q(R)^E K
  TwistedTensor<S> d0_star_d0;    // direct composite
  TwistedTensor<S> d0_d0_star;    // direct composite
  TwistedTensor<S> p3_star_p3;    // -p3~ nabla^2 K
};

template <Scalar S>
WeitzenbockTerms<S> weitzenbock_terms(const SectionJet2<S>& J) {
  require_projection_domain(J.n, J.k);
  return {q_R_E(J.R, J.RE, J.K), d0_star_d0(J), d0_d0_star(J), -second_order(EquivariantMap::p3, J)};
}

template <Scalar S>
struct WeitzenbockResult {
  TwistedTensor<S> residual;
  TwistedTensor<S> lhs;
  TwistedTensor<S> rhs;
  double max_abs = 0;
  double l2 = 0;    // sqrt of the Sym inner product of the residual
  double scale = 0; // largest operand norm
};

/// residual = q(R)^E K - [-k/(k+1) D0*D0 + c D0D0* + P3*P3] K.
template <Scalar S>
WeitzenbockResult<S> combine(const WeitzenbockTerms<S>& t, const WeitzenbockCoefficients<S>& c) {
  WeitzenbockResult<S> res;
  res.lhs = t.curvature;
  res.rhs = c.d0_star_d0 * t.d0_star_d0;
  res.rhs.add_scaled(c.d0_d0_star, t.d0_d0_star);
  res.rhs.add_scaled(c.p3_star_p3, t.p3_star_p3);
  res.residual = res.lhs - res.rhs;
  res.max_abs = res.residual.max_abs();
  res.l2 = std::sqrt(std::max(0.0, to_double(inner(res.residual, res.residual))));
  res.scale = std::max({t.curvature.max_abs(), t.d0_star_d0.max_abs(), t.d0_d0_star.max_abs(), t.p3_star_p3.max_abs()});
  return res;
}

template <Scalar S>
WeitzenbockResult<S> weitzenbock_residual(const SectionJet2<S>& J,
                                          const WeitzenbockCoefficients<S>* coeffs = nullptr) {
  const auto c = coeffs ? *coeffs : WeitzenbockCoefficients<S>::make(J.n, J.k);
  return combine(weitzenbock_terms(J), c);
}

}  // namespace symfiber
