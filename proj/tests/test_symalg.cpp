#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symfiber/random.hpp"

using namespace symfiber;
using Q = Rational;
using T = SymTensor<Q>;

namespace {

MultiIndex mi(std::vector<int> a) { return MultiIndex(std::move(a)); }

T e(int n, int i) { return T::frame(n, i); }

}  // namespace

TEST(MultiIndex, BasisSizesAndRanks) {
  for (int n = 1; n <= 6; ++n) {
    for (int k = 0; k <= 5; ++k) {
      const auto& b = MonomialBasis::get(n, k);
      ASSERT_EQ(b.size(), monomial_count(n, k));
      for (std::size_t a = 0; a < b.size(); ++a) {
        EXPECT_EQ(b.rank(b[a]), a);
        EXPECT_EQ(b[a].degree(), k);
        if (a + 1 < b.size()) EXPECT_LT(b[a], b[a + 1]);
      }
    }
  }
  EXPECT_EQ(trace_free_dim(3, 1), 3u);
  EXPECT_EQ(trace_free_dim(4, 3), 16u);
  EXPECT_THROW(MultiIndex({1, -1}), DimensionError);
}

TEST(SymAlg, ProductOfFrameVectors) {
  T p = sym_mul(e(3, 0), e(3, 1));
  EXPECT_EQ(p.at(mi({1, 1, 0})), 1);
  EXPECT_EQ(p.max_abs(), 1.0);
  EXPECT_TRUE(sym_mul(random_sym<Q>(3, 2, *std::make_unique<Rng>(1)), T(3, 1)).is_zero());
  EXPECT_THROW(sym_mul(e(3, 0), e(2, 0)), DimensionError);
}

TEST(SymAlg, ProductEvaluationOracle) {
  Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    T A = random_sym<Q>(3, 2, rng);
    T B = random_sym<Q>(3, 2, rng);
    T AB = sym_mul(A, B);
    EXPECT_EQ(AB, sym_mul(B, A));
    for (int s = 0; s < 5; ++s) {
      auto v = random_vector<Q>(3, rng);
      EXPECT_EQ(oracle::eval_poly(oracle::to_poly(AB), v),
                oracle::eval_poly(oracle::to_poly(A), v) * oracle::eval_poly(oracle::to_poly(B), v));
      EXPECT_EQ(evaluate(AB, v), evaluate(A, v) * evaluate(B, v));
    }
  }
}

TEST(SymAlg, Contraction) {
  T K = sym_mul(e(3, 0), e(3, 0));
  EXPECT_EQ(frame_contract(0, K), Q(2) * e(3, 0));
  EXPECT_TRUE(frame_contract(1, K).is_zero());
  EXPECT_TRUE(frame_contract(0, T::one(3)).is_void());
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    auto v = random_vector<Q>(4, rng);
    T Kt = random_sym<Q>(4, 3, rng);
    T B = random_sym<Q>(4, 2, rng);
    EXPECT_EQ(oracle::inner_by_permutations(vec_mul(v, B), Kt), oracle::inner_by_permutations(B, contract(v, Kt)));
  }
}

TEST(SymAlg, VecMul) {
  EXPECT_EQ(frame_mul(0, T::one(3)), e(3, 0));
  EXPECT_EQ(frame_mul(0, e(3, 0)).at(mi({2, 0, 0})), 1);
  Rng rng(6);
  for (int t = 0; t < 5; ++t) {
    auto v = random_vector<Q>(3, rng);
    T K = random_sym<Q>(3, 3, rng);
    T vK = vec_mul(v, K);
    for (int s = 0; s < 5; ++s) {
      auto w = random_vector<Q>(3, rng);
      Q vw = v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
      EXPECT_EQ(oracle::eval_poly(oracle::to_poly(vK), w), vw * oracle::eval_poly(oracle::to_poly(K), w));
    }
  }
}

TEST(SymAlg, LambdaAndL) {
  T L = metric_l<Q>(3);
  EXPECT_EQ(lambda_op(L), Q(6) * T::one(3));
  EXPECT_TRUE(lambda_op(sym_mul(e(3, 0), e(3, 1))).is_zero());
  EXPECT_EQ(lambda_op(sym_mul(e(3, 0), e(3, 0))), Q(2) * T::one(3));
  for (int i = 0; i < 3; ++i) {
    MultiIndex a = MultiIndex::zero(3) + MultiIndex::unit(3, i) + MultiIndex::unit(3, i);
    EXPECT_EQ(L.at(a), 1);
  }
  EXPECT_TRUE(l_op(T(3, 2)).is_zero());
  EXPECT_TRUE(lambda_op(e(3, 0)).is_void());
  EXPECT_TRUE(lambda_op(T::one(3)).is_void());
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    T A = random_sym<Q>(4, 2, rng);
    T B = random_sym<Q>(4, 4, rng);
    EXPECT_EQ(oracle::inner_by_permutations(l_op(A), B), oracle::inner_by_permutations(A, lambda_op(B)));
  }
}

TEST(SymAlg, InnerProduct) {
  EXPECT_EQ(inner(T::one(4), T::one(4)), 1);
  T a = sym_mul(e(3, 0), e(3, 1));
  T b = sym_mul(e(3, 0), e(3, 0));
  EXPECT_EQ(inner(a, a), 1);
  EXPECT_EQ(inner(b, b), 2);
  EXPECT_EQ(oracle::perm_inner({1, 1, 0}, {1, 1, 0}), 1);
  EXPECT_EQ(oracle::perm_inner({2, 0, 0}, {2, 0, 0}), 2);
  EXPECT_THROW(inner(a, T(3, 1)), DimensionError);
  Rng rng(8);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 0; k <= 5; ++k) {
      T A = random_sym<Q>(n, k, rng);
      T B = random_sym<Q>(n, k, rng);
      EXPECT_EQ(inner(A, B), oracle::inner_by_permutations(A, B));
    }
  }
}

TEST(SymAlg, Degree) {
  T p = sym_mul(sym_mul(e(3, 0), e(3, 1)), e(3, 2));
  EXPECT_EQ(deg_op(p), Q(3) * p);
}

TEST(SymAlg, Commutators) {
  Rng rng(9);
  for (int n = 2; n <= 6; ++n) {
    for (int k = 0; k <= 5; ++k) {
      T K = random_sym<Q>(n, k, rng);
      auto v = random_vector<Q>(n, rng);
      EXPECT_EQ(lambda_op(l_op(K)) - l_op(lambda_op(K)), Q(2 * n + 4 * k) * K);
      EXPECT_EQ(deg_op(l_op(K)) - l_op(deg_op(K)), Q(2) * l_op(K));
      EXPECT_EQ(deg_op(lambda_op(K)) - lambda_op(deg_op(K)), Q(-2) * lambda_op(K));
      EXPECT_EQ(lambda_op(vec_mul(v, K)) - vec_mul(v, lambda_op(K)), Q(2) * contract(v, K));
      EXPECT_EQ(contract(v, l_op(K)) - l_op(contract(v, K)), Q(2) * vec_mul(v, K));
      EXPECT_EQ(lambda_op(contract(v, K)), contract(v, lambda_op(K)));
      EXPECT_EQ(l_op(vec_mul(v, K)), vec_mul(v, l_op(K)));
      T euler1(n, k), euler2(n, k);
      for (int i = 0; i < n; ++i) {
        euler1 += frame_mul(i, frame_contract(i, K));
        euler2 += frame_contract(i, frame_mul(i, K));
      }
      EXPECT_EQ(euler1, Q(k) * K);
      EXPECT_EQ(euler2, Q(n + k) * K);
    }
  }
}

TEST(SymAlg, StandardDecomposition) {
  T e1sq = sym_mul(e(2, 0), e(2, 0));
  auto parts = standard_decomposition(e1sq);
  ASSERT_EQ(parts.size(), 2u);
  T expected0(2, 2);
  expected0.at(mi({2, 0})) = Q(1, 2);
  expected0.at(mi({0, 2})) = Q(-1, 2);
  EXPECT_EQ(parts[0], expected0);
  EXPECT_EQ(parts[1], Q(1, 2) * T::one(2));

  auto lparts = standard_decomposition(metric_l<Q>(5));
  EXPECT_TRUE(lparts[0].is_zero());
  EXPECT_EQ(lparts[1], T::one(5));

  Rng rng(10);
  for (int n = 2; n <= 6; ++n) {
    for (int k = 0; k <= 5; ++k) {
      T K = random_sym<Q>(n, k, rng);
      auto ps = standard_decomposition(K);
      EXPECT_EQ(reconstruct(ps), K);
      for (const auto& p : ps) EXPECT_TRUE(lambda_op(p).is_zero() || p.degree() < 2);
      T K0 = trace_free_part(K);
      auto tf = standard_decomposition(K0);
      EXPECT_EQ(tf[0], K0);
      for (std::size_t i = 1; i < tf.size(); ++i) EXPECT_TRUE(tf[i].is_zero());
    }
  }
}

TEST(SymAlg, StandardDecompositionBruteForce) {
  // Unknowns: all coefficients of K_0..K_p. Equations: sum_j L^j K_j = K and Lambda K_j = 0,
  // each written out monomial by monomial from the explicit polynomial rules.
  Rng rng(12);
  for (int n = 2; n <= 4; ++n) {
    for (int k = 2; k <= 4; ++k) {
      T K = random_sym<Q>(n, k, rng);
      std::vector<std::pair<int, std::vector<int>>> unknowns;
      for (int j = 0; 2 * j <= k; ++j) {
        for (const auto& m : MonomialBasis::get(n, k - 2 * j).monomials()) unknowns.push_back({j, m.entries()});
      }
      std::map<std::vector<int>, std::size_t> target_row;
      const auto& bk = MonomialBasis::get(n, k);
      for (std::size_t a = 0; a < bk.size(); ++a) target_row[bk[a].entries()] = a;
      std::vector<std::vector<Q>> A;
      std::vector<Q> rhs;
      // sum_j L^j K_j = K: expand |x|^{2j} x^beta by the multinomial theorem.
      for (std::size_t a = 0; a < bk.size(); ++a) {
        A.emplace_back(unknowns.size(), Q(0));
        rhs.push_back(K[a]);
      }
      for (std::size_t u = 0; u < unknowns.size(); ++u) {
        const auto& [j, beta] = unknowns[u];
        oracle::Poly p{{beta, Q(1)}};
        for (int s = 0; s < j; ++s) {
          oracle::Poly q;
          for (const auto& [ex, c] : p) {
            for (int i = 0; i < n; ++i) {
              auto e2 = ex;
              e2[static_cast<std::size_t>(i)] += 2;
              q[e2] += c;
            }
          }
          p = q;
        }
        for (const auto& [ex, c] : p) A[target_row[ex]][u] += c;
      }
      // Lambda K_j = 0: Laplacian of each unknown's monomial.
      for (int j = 0; 2 * j + 2 <= k; ++j) {
        const auto& bl = MonomialBasis::get(n, k - 2 * j - 2);
        const std::size_t base = A.size();
        for (std::size_t a = 0; a < bl.size(); ++a) {
          A.emplace_back(unknowns.size(), Q(0));
          rhs.push_back(0);
        }
        for (std::size_t u = 0; u < unknowns.size(); ++u) {
          if (unknowns[u].first != j) continue;
          for (int i = 0; i < n; ++i) {
            auto ex = unknowns[u].second;
            const int ai = ex[static_cast<std::size_t>(i)];
            if (ai < 2) continue;
            ex[static_cast<std::size_t>(i)] -= 2;
            A[base + bl.rank(MultiIndex(ex))][u] += Q(ai * (ai - 1));
          }
        }
      }
      auto x = oracle::solve_unique(A, rhs);
      ASSERT_EQ(oracle::rank_of(A), static_cast<int>(unknowns.size()));
      auto parts = standard_decomposition(K);
      for (std::size_t u = 0; u < unknowns.size(); ++u) {
        const auto& [j, beta] = unknowns[u];
        EXPECT_EQ(parts[static_cast<std::size_t>(j)].at(MultiIndex(beta)), x[u]);
      }
    }
  }
}

TEST(SymAlg, ProjectionFormula) {
  T r = project_v_mul0(std::span<const Q>(frame_vector<Q>(3, 0)), e(3, 1));
  EXPECT_EQ(r, sym_mul(e(3, 0), e(3, 1)));
  T r2 = frame_mul0(0, e(3, 0));
  EXPECT_EQ(r2, sym_mul(e(3, 0), e(3, 0)) - Q(1, 3) * metric_l<Q>(3));
  EXPECT_THROW(frame_mul0(0, T::one(2)), DomainError);
  Rng rng(13);
  for (int n = 3; n <= 5; ++n) {
    for (int k = 1; k <= 4; ++k) {
      T K0 = random_trace_free<Q>(n, k, rng);
      auto v = random_vector<Q>(n, rng);
      T out = project_v_mul0(v, K0);
      EXPECT_TRUE(lambda_op(out).is_zero());
      EXPECT_EQ(out + Q(1, n + 2 * k - 2) * l_op(contract(v, K0)), vec_mul(v, K0));
    }
  }
}

TEST(SymAlg, Evaluate) {
  Rng rng(14);
  for (int t = 0; t < 5; ++t) {
    auto v = random_unit_vector<Q>(4, rng);
    EXPECT_EQ(evaluate(metric_l<Q>(4), v), 1);
    EXPECT_EQ(evaluate(T::one(4), v), 1);
    T e1k = T::monomial(mi({3, 0, 0, 0}), Q(1));
    EXPECT_EQ(evaluate(e1k, v), v[0] * v[0] * v[0]);
    // g(e_1^3, v^3) = 3! v_1^3 by the permutation sum over S_3.
    T vv = vec_mul(v, vec_mul(v, SymTensor<Q>::vector(v)));
    EXPECT_EQ(oracle::inner_by_permutations(e1k, vv) / 6, Q(6) * v[0] * v[0] * v[0] / 6);
  }
}

TEST(SymAlg, FloatMode) {
  Rng rng(15);
  SymTensor<double> K = random_sym<double>(4, 3, rng);
  auto parts = standard_decomposition(K);
  SymTensor<double> back = reconstruct(parts);
  for (std::size_t a = 0; a < K.size(); ++a) EXPECT_NEAR(back[a], K[a], 1e-12);
  T Kq = random_sym<Q>(3, 2, rng);
  SymTensor<double> Kd = convert<double>(Kq);
  for (std::size_t a = 0; a < Kq.size(); ++a) EXPECT_EQ(Kd[a], Kq[a].get_d());
}
