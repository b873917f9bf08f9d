#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symfiber/pestov.hpp"

using namespace symfiber;
using Q = Rational;
using T = SymTensor<Q>;
using TT = TwistedTensor<Q>;
using FF = FiberField<Q>;
using NF = NormalField<Q>;

namespace {

SectionJet2<Q> generic_jet(int n, int k, int r, Rng& rng) {
  return random_jet<Q>(n, k, r, random_curvature<Q>(n, rng), random_bundle_curvature<Q>(n, r, rng), rng);
}

bool support_within(const FF& f, std::vector<int> allowed) {
  for (int d : f.support()) {
    if (std::find(allowed.begin(), allowed.end(), d) == allowed.end()) return false;
  }
  return true;
}

struct Cell {
  int n, k, r;
};

std::vector<Cell> grid() {
  std::vector<Cell> out;
  for (int n = 3; n <= 5; ++n)
    for (int k = 1; k <= 3; ++k)
      for (int r = 1; r <= 2; ++r) out.push_back({n, k, r});
  return out;
}

}  // namespace

TEST(LinkD, ParallelJet) {
  Rng rng(1);
  auto J = random_jet<Q>(4, 2, 2, AlgCurvature<Q>(4), BundleCurvature<Q>(4, 2), rng, JetKind::parallel);
  EXPECT_TRUE(op_X(J).is_zero());
  EXPECT_TRUE(nabla_H(J).is_zero());
  EXPECT_TRUE(op_Z(J).is_zero());
  EXPECT_TRUE(pestov_residual(J).residual.is_zero());
  auto t = pestov_terms(J);
  EXPECT_TRUE(t.curvature_R.is_zero() && t.curvature_F.is_zero() && t.z_star_z.is_zero());
}

TEST(LinkD, XIsPullbackOfD) {
  Rng rng(2);
  for (const auto& c : grid()) {
    auto J = generic_jet(c.n, c.k, c.r, rng);
    const FF x = op_X(J);
    EXPECT_EQ(x, pullback(op_D(J)));
    EXPECT_TRUE(support_within(x, {c.k - 1, c.k + 1}));
    const FF xp = op_X_plus(J), xm = op_X_minus(J);
    EXPECT_EQ(xp + xm, x);
    EXPECT_EQ(xp, pullback(op_D0(J)));
    EXPECT_EQ(xm, Q(-1, c.n + 2 * c.k - 2) * pullback(op_D0_star(J)));
  }
}

TEST(LinkD, Instances) {
  Rng rng(3);
  // The lowering factor -1/(n+2k-2): -1/5 at n = 3, k = 2 and -1/7 at n = 3, k = 3.
  auto J = generic_jet(3, 2, 1, rng);
  EXPECT_EQ(op_X_minus(J), Q(-1, 5) * pullback(op_D_star(J)));
  EXPECT_FALSE(op_X_minus(J).is_zero());
  auto J3 = generic_jet(3, 3, 1, rng);
  EXPECT_EQ(op_X_minus(J3), Q(-1, 7) * pullback(op_D_star(J3)));
  // Conformal Killing jets are killed by X_+.
  auto C = random_jet<Q>(4, 2, 2, random_curvature<Q>(4, rng), random_bundle_curvature<Q>(4, 2, rng),
                         rng, JetKind::conformal_killing);
  EXPECT_TRUE(op_X_plus(C).is_zero());
  EXPECT_FALSE(op_X_minus(C).is_zero());
  // Untwisted k = 0 with dK(i) = c_i: X pi*_0 = sum c_i v_i.
  const int n = 3;
  std::vector<TT> dK;
  std::vector<Q> cvec{Q(2), Q(-1), Q(5)};
  for (int i = 0; i < n; ++i) dK.push_back(TT::untwisted(cvec[i] * T::one(n)));
  auto J0 = assemble_jet(AlgCurvature<Q>(n), BundleCurvature<Q>(n, 1), TT(n, 0, 1), dK,
                         std::vector<TT>(n * n, TT(n, 0, 1)));
  auto x0 = op_X(J0);
  EXPECT_EQ(x0.support(), std::vector<int>{1});
  EXPECT_EQ(x0.component(1), TT::untwisted(T::vector(cvec)));
}

TEST(Horizontal, SubmersionSplit) {
  Rng rng(4);
  for (const auto& c : grid()) {
    auto J = generic_jet(c.n, c.k, c.r, rng);
    const NF h = nabla_H(J);
    EXPECT_TRUE(h.is_tangent());
    const NF full = pullback(J.gradient());
    EXPECT_EQ(full.radial(), op_X(J));
    NF split = h;
    for (int a = 0; a < c.n; ++a) split.comp(a) += mul_coordinate(a, op_X(J));
    EXPECT_EQ(split, full);
  }
}

TEST(Ladders, CompositeFactors) {
  Rng rng(5);
  for (const auto& c : grid()) {
    auto J = generic_jet(c.n, c.k, c.r, rng);
    auto [mp, pm] = second_order_fiber(J);
    EXPECT_EQ(pullback(d0_star_d0(J)), Q(-(c.n + 2 * c.k)) * mp);
    EXPECT_EQ(pullback(d0_d0_star(J)), Q(-(c.n + 2 * c.k - 2)) * pm);
    EXPECT_TRUE(support_within(mp, {c.k}));
    EXPECT_TRUE(support_within(pm, {c.k}));
  }
  // n = 3, k = 2: factors -7 and -5.
  auto J = generic_jet(3, 2, 2, rng);
  EXPECT_EQ(pullback(d0_star_d0(J)), Q(-7) * ladder_minus_plus(J));
  EXPECT_EQ(pullback(d0_d0_star(J)), Q(-5) * ladder_plus_minus(J));
  EXPECT_FALSE(ladder_minus_plus(J).is_zero());
  EXPECT_FALSE(ladder_plus_minus(J).is_zero());
}

TEST(ZOperator, EqualsPullbackOfP3AndKeepsDegree) {
  Rng rng(6);
  for (const auto& c : grid()) {
    auto J = generic_jet(c.n, c.k, c.r, rng);
    const NF z = op_Z(J);
    EXPECT_EQ(z, pullback(op_P(3, J)));
    EXPECT_TRUE(z.is_tangent());
    EXPECT_FALSE(z.is_zero());
    for (int a = 0; a < c.n; ++a) EXPECT_TRUE(support_within(z.comp(a), {c.k}));
  }
  EXPECT_THROW(require_pestov_domain(2, 1), DomainError);
  EXPECT_THROW(require_pestov_domain(3, 0), DomainError);
}

TEST(CurvatureMorphisms, ComponentOracle) {
  // Constant curvature c = -1, n = 2, w = e2, v = e1: R_{w,v} v = e2.
  const auto R2 = constant_curvature<Q>(2, Q(-1));
  NF W(2, 1);
  W.comp(1) = pullback(TT::untwisted(T::one(2)));
  auto RW = calligraphic_R(W, R2);
  const std::vector<Q> e1{Q(1), Q(0)};
  EXPECT_EQ(RW.comp(0).evaluate(e1)[0], 0);
  EXPECT_EQ(RW.comp(1).evaluate(e1)[0], 1);

  Rng rng(7);
  for (int n = 3; n <= 5; ++n) {
    const auto R = random_curvature<Q>(n, rng);
    const auto w = random_vector<Q>(n, rng);
    NF Wc = constant_times<Q>(w, pullback(TT::untwisted(T::one(n))));
    auto out = calligraphic_R(Wc, R);
    EXPECT_TRUE(out.is_tangent());
    for (int t = 0; t < 4; ++t) {
      auto v = random_unit_vector<Q>(n, rng);
      for (int l = 0; l < n; ++l) {
        Q expect = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int m = 0; m < n; ++m) expect += R(a, b, m, l) * w[a] * v[b] * v[m];
        EXPECT_EQ(out.comp(l).evaluate(v)[0], expect);
      }
    }
    EXPECT_TRUE(calligraphic_R(Wc, AlgCurvature<Q>(n)).is_zero());
  }
}

TEST(CurvatureMorphisms, SymmetryAndRankOne) {
  Rng rng(8);
  for (int n = 3; n <= 4; ++n) {
    const auto R = random_curvature<Q>(n, rng);
    auto f = pullback(random_twisted<Q>(n, 2, 1, rng));
    auto g = pullback(random_twisted<Q>(n, 3, 1, rng));
    auto W = vertical_gradient(f), U = vertical_gradient(g);
    EXPECT_EQ(l2_inner(calligraphic_R(W, R), U), l2_inner(W, calligraphic_R(U, R)));
    auto psi = pullback(random_twisted<Q>(n, 2, 1, rng));
    EXPECT_TRUE(script_F(psi, random_bundle_curvature<Q>(n, 1, rng)).is_zero());
    auto psi2 = pullback(random_twisted<Q>(n, 2, 3, rng));
    auto F = script_F(psi2, random_bundle_curvature<Q>(n, 3, rng));
    EXPECT_TRUE(F.is_tangent());
    EXPECT_FALSE(F.is_zero());
  }
}

TEST(LinkF, CurvatureTermsArePullbacks) {
  Rng rng(9);
  for (const auto& c : grid()) {
    for (int t = 0; t < 2; ++t) {
      auto J = generic_jet(c.n, c.k, c.r, rng);
      auto rep = link_f_check(J);
      EXPECT_TRUE(rep.r_holds()) << c.n << c.k << c.r;
      EXPECT_TRUE(rep.f_holds()) << c.n << c.k << c.r;
      EXPECT_FALSE(rep.r_lhs.is_zero());
    }
  }
  auto Z = random_jet<Q>(3, 2, 2, AlgCurvature<Q>(3), BundleCurvature<Q>(3, 2), rng);
  auto rep = link_f_check(Z);
  EXPECT_TRUE(rep.r_lhs.is_zero() && rep.f_lhs.is_zero() && rep.r_rhs.is_zero());
}

TEST(Pestov, ResidualVanishesExactly) {
  Rng rng(10);
  for (const auto& c : grid()) {
    for (int t = 0; t < 3; ++t) {
      auto J = generic_jet(c.n, c.k, c.r, rng);
      auto res = pestov_residual(J);
      EXPECT_TRUE(res.residual.is_zero()) << c.n << c.k << c.r;
      EXPECT_GT(res.scale, 0.0);
    }
  }
}

TEST(Pestov, ConstantCurvature) {
  Rng rng(11);
  for (int n = 3; n <= 4; ++n) {
    for (int k = 1; k <= 2; ++k) {
      auto J = random_jet<Q>(n, k, 2, constant_curvature<Q>(n, Q(-1)), random_bundle_curvature<Q>(n, 2, rng), rng);
      EXPECT_TRUE(pestov_residual(J).residual.is_zero());
    }
  }
}

TEST(Pestov, FloatMode) {
  Rng rng(12);
  for (int t = 0; t < 6; ++t) {
    const int n = 3 + t % 2, k = 1 + t % 3;
    auto J = convert<double>(generic_jet(n, k, 2, rng));
    auto res = pestov_residual(J);
    EXPECT_LE(res.max_abs, 1e-9 * res.scale);
  }
}

TEST(Pestov, MutationsAreDetected) {
  Rng rng(13);
  const int trials = 10;
  int hits[5] = {0, 0, 0, 0, 0};
  for (int t = 0; t < trials; ++t) {
    auto J = generic_jet(4, 2, 2, rng);
    const auto terms = pestov_terms(J);
    for (int m = 0; m < 5; ++m) {
      auto c = PestovCoefficients<Q>::make(4, 2);
      Q* slot[5] = {&c.curvature_R, &c.curvature_F, &c.minus_plus, &c.plus_minus, &c.z_star_z};
      *slot[m] += 1;
      if (!combine(terms, c).residual.is_zero()) ++hits[m];
    }
  }
  for (int m = 0; m < 5; ++m) EXPECT_EQ(hits[m], trials) << m;
}

// The identity is the pullback of the twisted Weitzenboeck formula; this holds
// even on jets that violate the curvature constraint, where both sides are nonzero.
TEST(Pestov, PullbackOfWeitzenbockOnCorruptedJets) {
  Rng rng(14);
  for (const auto& c : grid()) {
    auto J = generic_jet(c.n, c.k, c.r, rng);
    J.d2(0, 1) += random_twisted<Q>(c.n, c.k, c.r, rng);
    ASSERT_FALSE(validate_jet(J).empty());
    auto w = weitzenbock_residual(J);
    auto p = pestov_residual(J);
    EXPECT_FALSE(p.residual.is_zero());
    EXPECT_EQ(p.residual, pullback(w.residual));
  }
}
