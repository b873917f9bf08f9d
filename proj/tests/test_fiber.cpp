#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symfiber/fiber.hpp"
#include "symfiber/random.hpp"

using namespace symfiber;
using Q = Rational;
using T = SymTensor<Q>;
using TT = TwistedTensor<Q>;
using FF = FiberField<Q>;
using NF = NormalField<Q>;

namespace {

/// Random field with components in several degrees, not canonical on input.
FF random_field(int n, int r, int max_deg, Rng& rng) {
  FF f(n, r);
  for (int d = 0; d <= max_deg; ++d) f.add_polynomial(random_twisted<Q>(n, d, r, rng, false));
  return f;
}

NF random_normal(int n, int r, int max_deg, Rng& rng, bool tangent) {
  std::vector<FF> comps;
  for (int a = 0; a < n; ++a) comps.push_back(random_field(n, r, max_deg, rng));
  NF W(std::move(comps));
  return tangent ? tangent_projection(W) : W;
}

Q dot(const std::vector<Q>& a, const std::vector<Q>& b) {
  Q s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST(SphereIntegral, Examples) {
  EXPECT_EQ(sphere_integral<Q>(MultiIndex({1, 0, 0})), 0);
  for (int n = 2; n <= 6; ++n) {
    std::vector<int> a(n, 0);
    a[0] = 2;
    EXPECT_EQ(sphere_integral<Q>(MultiIndex(a)), Q(1, n));
  }
  EXPECT_EQ(sphere_integral<Q>(MultiIndex({2, 2, 0, 0})), Q(1, 24));
  EXPECT_EQ(sphere_integral<Q>(MultiIndex({0, 0, 0})), 1);
}

TEST(SphereIntegral, MatchesGammaFormula) {
  for (int n = 2; n <= 5; ++n) {
    for (int k = 0; k <= 8; ++k) {
      const auto& b = MonomialBasis::get(n, k);
      for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(sphere_integral<Q>(b[i]).get_d(), oracle::sphere_average_gamma(b[i].entries()), 1e-13)
            << b[i].str();
      }
    }
  }
}

TEST(Pullback, ExamplesAndEvaluation) {
  const int n = 3;
  // pi*_2(L) = 1.
  EXPECT_EQ(pullback(TT::untwisted(metric_l<Q>(n))), pullback(TT::untwisted(T::one(n))));
  const std::vector<Q> xi{Q(1), Q(-2)};
  auto c = pullback(TT::decomposable(T::one(n), xi));
  EXPECT_EQ(c.support(), std::vector<int>{0});
  Rng rng(1);
  for (int k = 0; k <= 4; ++k) {
    auto e1k = TT::untwisted(T::monomial(MultiIndex({k, 0, 0}), Q(1)));
    auto Psi = random_twisted<Q>(n, k, 2, rng, false);
    auto f = pullback(Psi);
    for (int t = 0; t < 5; ++t) {
      auto v = random_unit_vector<Q>(n, rng);
      Q vk = 1;
      for (int j = 0; j < k; ++j) vk *= v[0];
      EXPECT_EQ(pullback(e1k).evaluate(v)[0], vk);
      auto val = f.evaluate(v);
      for (int e = 0; e < 2; ++e) EXPECT_EQ(val[e], oracle::eval_poly(oracle::to_poly(Psi.slot(e)), v));
    }
  }
}

TEST(Pullback, HomomorphismAndLInvariance) {
  Rng rng(2);
  for (int n = 2; n <= 5; ++n) {
    for (int k = 0; k <= 3; ++k) {
      const auto K = random_sym<Q>(n, k, rng);
      const auto K2 = random_sym<Q>(n, 2, rng);
      const auto xi = random_vector<Q>(2, rng);
      EXPECT_EQ(multiply(pullback(TT::untwisted(K)), pullback(TT::decomposable(K2, xi))),
                pullback(TT::decomposable(sym_mul(K, K2), xi)));
      const auto Psi = random_twisted<Q>(n, k, 2, rng, false);
      EXPECT_EQ(pullback(l_op(Psi)), pullback(Psi));
    }
  }
}

TEST(Pullback, TraceFreeInputIsOneComponent) {
  Rng rng(3);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 0; k <= 4; ++k) {
      auto Psi = random_twisted<Q>(n, k, 2, rng);
      auto f = pullback(Psi);
      if (Psi.is_zero()) continue;
      EXPECT_EQ(f.support(), std::vector<int>{k});
      EXPECT_EQ(f.component(k), Psi);
    }
  }
}

TEST(HarmonicProjection, Components) {
  const int n = 2;
  auto f = pullback(TT::untwisted(T::monomial(MultiIndex({2, 0}), Q(1))));
  EXPECT_EQ(harmonic_projection(f, 0).component(0).slot(0)[0], Q(1, 2));
  T h(n, 2);
  h.at(MultiIndex({2, 0})) = Q(1, 2);
  h.at(MultiIndex({0, 2})) = Q(-1, 2);
  EXPECT_EQ(harmonic_projection(f, 2).component(2), TT::untwisted(h));
  EXPECT_TRUE(harmonic_projection(f, 1).is_zero());

  Rng rng(4);
  for (int n2 = 3; n2 <= 4; ++n2) {
    auto g = random_field(n2, 2, 4, rng);
    FF sum(n2, 2);
    for (int k = 0; k <= 4; ++k) {
      auto gk = harmonic_projection(g, k);
      EXPECT_EQ(harmonic_projection(gk, k), gk);
      sum += gk;
      for (int l = 0; l < k; ++l) EXPECT_EQ(l2_inner(gk, harmonic_projection(g, l)), 0);
    }
    EXPECT_EQ(sum, g);
  }
}

TEST(Vertical, GradientMatchesAmbientOracle) {
  Rng rng(5);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 0; k <= 3; ++k) {
      auto K = random_sym<Q>(n, k, rng);
      auto grad = vertical_gradient(pullback(TT::untwisted(K)));
      EXPECT_TRUE(grad.is_tangent());
      const auto P = oracle::to_poly(K);
      for (int t = 0; t < 4; ++t) {
        auto v = random_unit_vector<Q>(n, rng);
        std::vector<Q> g(n);
        for (int a = 0; a < n; ++a) g[a] = oracle::eval_poly(oracle::derivative(P, a), v);
        const Q radial = dot(g, v);
        for (int a = 0; a < n; ++a) EXPECT_EQ(grad.comp(a).evaluate(v)[0], g[a] - radial * v[a]);
      }
    }
  }
}

TEST(Vertical, LaplacianEigenvalues) {
  EXPECT_TRUE(vertical_laplacian(pullback(TT::untwisted(T::one(3)))).is_zero());
  Rng rng(6);
  for (int n = 2; n <= 6; ++n) {
    for (int k = 0; k <= 5; ++k) {
      auto f = pullback(random_twisted<Q>(n, k, 2, rng));
      EXPECT_EQ(vertical_laplacian(f), Q(k * (n + k - 2)) * f);
    }
  }
  auto f3 = pullback(TT::untwisted(random_trace_free<Q>(3, 2, rng)));
  EXPECT_EQ(vertical_laplacian(f3), Q(6) * f3);
  auto f42 = pullback(TT::untwisted(random_trace_free<Q>(4, 2, rng)));
  EXPECT_EQ(vertical_laplacian(f42), Q(8) * f42);
  auto f4 = pullback(TT::untwisted(random_trace_free<Q>(4, 3, rng)));
  EXPECT_EQ(vertical_laplacian(f4), Q(15) * f4);
}

TEST(Vertical, AdjointnessOnTangentFields) {
  Rng rng(7);
  for (int n = 2; n <= 5; ++n) {
    for (int t = 0; t < 3; ++t) {
      auto f = random_field(n, 2, 3, rng);
      auto W = random_normal(n, 2, 3, rng, true);
      ASSERT_TRUE(W.is_tangent());
      EXPECT_EQ(l2_inner(vertical_gradient(f), W), l2_inner(f, vertical_div_star(W)));
      EXPECT_EQ(vertical_adjoint(W), vertical_div_star(W));
    }
  }
}

TEST(Vertical, AdjointOnGeneralFieldsHasRadialTerm) {
  Rng rng(8);
  for (int n = 3; n <= 4; ++n) {
    auto f = random_field(n, 1, 3, rng);
    auto W = random_normal(n, 1, 2, rng, false);
    ASSERT_FALSE(W.is_tangent());
    EXPECT_EQ(l2_inner(vertical_gradient(f), W), l2_inner(f, vertical_adjoint(W)));
    EXPECT_NE(l2_inner(vertical_gradient(f), W), l2_inner(f, vertical_div_star(W)));
  }
}

TEST(SkMap, SplitAndLinkV) {
  const int n = 3;
  const std::vector<Q> xi{Q(1), Q(3)};
  auto Psi1 = TT::decomposable(T::frame(n, 0), xi);
  auto s1 = s_k_map(Psi1);
  EXPECT_EQ(s1.comp(0), TT::decomposable(T::one(n), xi));
  EXPECT_TRUE(s1.comp(1).is_zero());
  auto split1 = eq_kp_split(Psi1);
  const std::vector<Q> v1{Q(1), Q(0), Q(0)};
  const std::vector<Q> zero2(2, Q(0));
  for (int a = 0; a < n; ++a) {
    EXPECT_EQ(split1.tangential.comp(a).evaluate(v1), zero2);
    EXPECT_EQ(split1.radial.comp(a).evaluate(v1), (a == 0 ? xi : zero2));
  }

  Rng rng(9);
  for (int n2 = 3; n2 <= 5; ++n2) {
    for (int k = 1; k <= 4; ++k) {
      auto Psi = random_twisted<Q>(n2, k, 2, rng);
      auto split = eq_kp_split(Psi);
      auto f = pullback(Psi);
      EXPECT_TRUE(split.tangential.is_tangent());
      EXPECT_EQ(split.tangential, vertical_gradient(f));
      for (int a = 0; a < n2; ++a) EXPECT_EQ(split.radial.comp(a), Q(k) * mul_coordinate(a, f));
      for (int t = 0; t < 4; ++t) {
        auto v = random_unit_vector<Q>(n2, rng);
        const auto fv = f.evaluate(v);
        for (int a = 0; a < n2; ++a) {
          auto r = split.radial.comp(a).evaluate(v);
          for (int e = 0; e < 2; ++e) EXPECT_EQ(r[e], Q(k) * fv[e] * v[a]);
        }
      }
    }
  }
  EXPECT_THROW(s_k_map(TT(3, 0, 1)), DomainError);
}

TEST(Vertical, DivStarOfDecomposables) {
  const int n = 3;
  const std::vector<Q> xi{Q(2), Q(-1)};
  const auto w = frame_vector<Q>(n, 0);
  // k = 0 gives zero.
  EXPECT_TRUE(vertical_div_star_decomposable<Q>(w, TT::decomposable(T::one(n), xi)).is_zero());
  // w = e1, K = e1.
  auto lhs = vertical_div_star_decomposable<Q>(w, TT::decomposable(T::frame(n, 0), xi));
  auto expect = -pullback(TT::decomposable(T::one(n), xi)) +
                pullback(TT::decomposable(T::monomial(MultiIndex({2, 0, 0}), Q(1)), xi));
  EXPECT_EQ(lhs, expect);

  Rng rng(10);
  for (int n2 = 3; n2 <= 5; ++n2) {
    for (int k = 0; k <= 3; ++k) {
      auto Psi = random_twisted<Q>(n2, k, 2, rng);
      auto wv = random_vector<Q>(n2, rng);
      auto f = pullback(Psi);
      auto W = constant_times<Q>(wv, f);
      EXPECT_EQ(vertical_div_star(W), vertical_div_star_decomposable<Q>(wv, Psi));
      // Against the gradient: the pairing sees only the tangential part of W.
      auto g = random_field(n2, 2, 3, rng);
      EXPECT_EQ(l2_inner(vertical_gradient(g), W), l2_inner(g, vertical_div_star(tangent_projection(W))));
    }
  }
}

TEST(Fiber, FloatMode) {
  Rng rng(11);
  auto Psi = random_twisted<Q>(4, 3, 2, rng);
  auto fd = pullback(convert<double>(Psi));
  auto lap = vertical_laplacian(fd);
  auto diff = lap - 15.0 * fd;
  EXPECT_LE(diff.max_abs(), 1e-9 * fd.max_abs());
}
