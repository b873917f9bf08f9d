#pragma once

// Seeded verification suites over a (n, k, r) grid.
//
// Every identity is checked per cell on `trials` random draws. A draw's seed is
// mix_seed(seed, group, n, k, r, trial), so a report depends only on the config,
// never on thread count or scheduling. Cells outside an identity's domain are
// excluded with the library's own domain message as the reason.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "symfiber/json_io.hpp"
#include "symfiber/pestov.hpp"

namespace symfiber {

inline constexpr const char* kReportSchema = "symfiber.report";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

struct IntRange {
  int lo = 0;
  int hi = -1;
  bool empty() const { return lo > hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// "a..b" or a single integer "a".
inline IntRange parse_range(const std::string& text) {
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (s.empty() || pos != s.size()) throw UsageError("malformed range '" + text + "' (expected a..b)");
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = to_int(text);
    return {v, v};
  }
  return {to_int(text.substr(0, dots)), to_int(text.substr(dots + 2))};
}

inline std::string range_str(const IntRange& r) { return std::to_string(r.lo) + ".." + std::to_string(r.hi); }

struct SuiteConfig {
  IntRange n{3, 5};
  IntRange k{1, 3};
  IntRange r{1, 2};
  int trials = 10;
  ScalarMode mode = ScalarMode::rational;
  double tol = 1e-9;  // float mode only
  std::uint64_t seed = 0;
  std::vector<std::string> suites;  // empty = all
  std::string mutation;             // empty = none; see mutation_names()
  int threads = 0;                  // 0 = SYMFIBER_THREADS or hardware concurrency
};

/// Result of one identity on one draw.
struct Outcome {
  bool zero = true;   // residual exactly zero
  double abs = 0;     // max |residual coefficient|
  double rel = 0;     // abs relative to the largest operand
  int detected = 0;   // negative controls only
  int attempted = 0;

  void merge(const Outcome& o) {
    zero = zero && o.zero;
    abs = std::max(abs, o.abs);
    rel = std::max(rel, o.rel);
    detected += o.detected;
    attempted += o.attempted;
  }
  static Outcome boolean(bool ok) {
    Outcome o;
    o.zero = ok;
    o.abs = ok ? 0.0 : 1.0;
    o.rel = ok ? 0.0 : std::numeric_limits<double>::infinity();
    return o;
  }
};

struct RunContext {
  ScalarMode mode = ScalarMode::rational;
  double tol = 1e-9;
  std::string mutation;

  bool passes(const Outcome& o) const { return mode == ScalarMode::rational ? o.zero : o.rel <= tol; }
};

namespace harness_detail {

inline double relative(double abs, double scale) {
  if (abs == 0) return 0;
  return scale > 0 ? abs / scale : std::numeric_limits<double>::infinity();
}

template <class A>
Outcome compare(const A& lhs, const A& rhs) {
  const A d = lhs - rhs;
  Outcome o;
  o.zero = d.is_zero();
  o.abs = d.max_abs();
  o.rel = relative(o.abs, std::max(lhs.max_abs(), rhs.max_abs()));
  return o;
}

template <Scalar S>
Outcome compare_scalar(const S& lhs, const S& rhs) {
  const S d = lhs - rhs;
  Outcome o;
  o.zero = is_zero(d);
  o.abs = abs_double(d);
  o.rel = relative(o.abs, std::max(abs_double(lhs), abs_double(rhs)));
  return o;
}

template <class A>
Outcome is_zero_outcome(const A& x, double scale) {
  Outcome o;
  o.zero = x.is_zero();
  o.abs = x.max_abs();
  o.rel = relative(o.abs, scale);
  return o;
}

/// Negative control: a perturbed residual must fail the pass policy.
inline Outcome control(const std::vector<std::pair<bool, double>>& perturbed, const RunContext& ctx) {
  Outcome o;
  for (const auto& [zero, rel] : perturbed) {
    ++o.attempted;
    const bool fails = ctx.mode == ScalarMode::rational ? !zero : rel > ctx.tol;
    if (fails) ++o.detected;
  }
  return o;
}

template <Scalar S>
SectionJet2<S> generic_jet(int n, int k, int r, Rng& rng, JetKind kind = JetKind::generic) {
  return random_jet<S>(n, k, r, random_curvature<S>(n, rng), random_bundle_curvature<S>(n, r, rng), rng, kind);
}

template <Scalar S>
FiberField<S> random_field(int n, int r, int max_deg, Rng& rng) {
  FiberField<S> f(n, r);
  for (int d = 0; d <= max_deg; ++d) f.add_polynomial(random_twisted<S>(n, d, r, rng, false));
  return f;
}

template <Scalar S>
NormalField<S> random_normal(int n, int r, int max_deg, Rng& rng) {
  std::vector<FiberField<S>> comps;
  for (int a = 0; a < n; ++a) comps.push_back(random_field<S>(n, r, max_deg, rng));
  return NormalField<S>(std::move(comps));
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace harness_detail

struct Cell {
  int n = 0, k = 0, r = 0;  // r = 0: the identity does not involve E
};

/// A group of identities checked on the same draws.
struct IdentityGroup {
  std::string key;
  std::string suite;
  std::string module;
  std::vector<std::string> identities;
  std::vector<bool> controls;  // parallel to identities
  bool uses_r = true;
  std::function<void(const Cell&)> domain;  // throws DomainError outside the domain
  std::function<std::vector<Outcome>(const Cell&, Rng&, const RunContext&)> run_rational;
  std::function<std::vector<Outcome>(const Cell&, Rng&, const RunContext&)> run_float;
};

namespace harness_detail {

template <class F>
IdentityGroup make_group(std::string key, std::string suite, std::string module,
                         std::vector<std::pair<std::string, bool>> ids, bool uses_r,
                         std::function<void(const Cell&)> domain, F f) {
  IdentityGroup g;
  g.key = std::move(key);
  g.suite = std::move(suite);
  g.module = std::move(module);
  for (auto& [name, ctl] : ids) {
    g.identities.push_back(name);
    g.controls.push_back(ctl);
  }
  g.uses_r = uses_r;
  g.domain = std::move(domain);
  g.run_rational = [f](const Cell& c, Rng& rng, const RunContext& ctx) {
    return f(std::type_identity<Rational>{}, c, rng, ctx);
  };
  g.run_float = [f](const Cell& c, Rng& rng, const RunContext& ctx) {
    return f(std::type_identity<double>{}, c, rng, ctx);
  };
  return g;
}

inline void need_n2(const Cell& c) { require_domain(c.n >= 2, "needs n >= 2 (got n=" + std::to_string(c.n) + ")"); }

inline void need_projection(const Cell& c) { require_projection_domain(c.n, c.k); }

}  // namespace harness_detail

/// Names accepted by SuiteConfig::mutation; each perturbs one coefficient by +1.
inline const std::vector<std::string>& mutation_names() {
  static const std::vector<std::string> names{
      "weitzenbock.d0_star_d0", "weitzenbock.d0_d0_star", "weitzenbock.p3_star_p3", "pestov.curvature_R",
      "pestov.curvature_F",     "pestov.minus_plus",      "pestov.plus_minus",      "pestov.z_star_z"};
  return names;
}

/// Every identity group, in report order.
inline const std::vector<IdentityGroup>& identity_groups() {
  using namespace harness_detail;
  static const std::vector<IdentityGroup> groups = [] {
    std::vector<IdentityGroup> g;
    auto any = [](const Cell&) {};

    // ---- algebra on Sym^k R^n
    g.push_back(make_group(
        "commutators", "algebra", "symalg",
        {{"commutator [Lambda, L] = (2n + 4k) id", false},
         {"commutator [Lambda, v.] = 2 v-contraction; [Lambda, v-contraction] = 0", false},
         {"commutator [v-contraction, L] = 2 v.; [L, v.] = 0", false},
         {"Euler identities for the degree operator", false}},
        false, any, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto K = random_sym<S>(n, k, rng);
          const auto v = random_vector<S>(n, rng);
          Outcome commu = compare(lambda_op(l_op(K)) - l_op(lambda_op(K)), S(scalar<S>(2 * n + 4 * k)) * K);
          Outcome commu2 = compare(lambda_op(vec_mul(v, K)) - vec_mul(v, lambda_op(K)), S(scalar<S>(2)) * contract(v, K));
          commu2.merge(compare(lambda_op(contract(v, K)), contract(v, lambda_op(K))));
          Outcome commu3 = compare(contract(v, l_op(K)) - l_op(contract(v, K)), S(scalar<S>(2)) * vec_mul(v, K));
          commu3.merge(compare(l_op(vec_mul(v, K)), vec_mul(v, l_op(K))));
          SymTensor<S> e1(n, k), e2(n, k);
          for (int i = 0; i < n; ++i) {
            e1 += frame_mul(i, frame_contract(i, K));
            e2 += frame_contract(i, frame_mul(i, K));
          }
          Outcome euler = compare(e1, S(scalar<S>(k)) * K);
          euler.merge(compare(e2, S(scalar<S>(n + k)) * K));
          euler.merge(compare(deg_op(l_op(K)) - l_op(deg_op(K)), S(scalar<S>(2)) * l_op(K)));
          euler.merge(compare(deg_op(lambda_op(K)) - lambda_op(deg_op(K)), S(scalar<S>(-2)) * lambda_op(K)));
          return std::vector<Outcome>{commu, commu2, commu3, euler};
        }));

    g.push_back(make_group(
        "inner", "algebra", "symalg",
        {{"adjointness: <v A, B> = <A, v-contraction B> and <L A, B> = <A, Lambda B>", false},
         {"inner product consistency: <A, B> = A(d/dx) B", false}},
        false, any, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto A = random_sym<S>(n, k, rng);
          const auto B1 = random_sym<S>(n, k + 1, rng);
          const auto B2 = random_sym<S>(n, k + 2, rng);
          const auto v = random_vector<S>(n, rng);
          Outcome adj = compare_scalar(inner(vec_mul(v, A), B1), inner(A, contract(v, B1)));
          adj.merge(compare_scalar(inner(l_op(A), B2), inner(A, lambda_op(B2))));
          // A acting as a constant-coefficient differential operator on B.
          const auto B = random_sym<S>(n, k, rng);
          S acc = scalar<S>(0);
          for (std::size_t a = 0; a < A.size(); ++a) {
            if (is_zero(A[a])) continue;
            SymTensor<S> t = B;
            const MultiIndex& alpha = A.basis()[a];
            for (int i = 0; i < n; ++i)
              for (int s = 0; s < alpha[i]; ++s) t = frame_contract(i, t);
            acc += A[a] * t[0];
          }
          Outcome cons = compare_scalar(inner(A, B), acc);
          cons.merge(compare_scalar(inner(A, B), inner(B, A)));
          return std::vector<Outcome>{adj, cons};
        }));

    g.push_back(make_group(
        "projection", "algebra", "symalg",
        {{"trace-free projection of v K0: v K0 = (v K0)_0 - L(v-contraction K0)/(n+2k-2)", false}}, false,
        [](const Cell& c) { require_domain(c.n + 2 * c.k - 2 != 0, "n + 2k - 2 = 0"); },
        [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const auto K0 = random_trace_free<S>(c.n, c.k, rng);
          const auto v = random_vector<S>(c.n, rng);
          const auto out = project_v_mul0(v, K0);
          Outcome o = compare(out + S(scalar<S>(1, c.n + 2 * c.k - 2)) * l_op(contract(v, K0)), vec_mul(v, K0));
          o.merge(is_zero_outcome(lambda_op(out), out.max_abs()));
          return std::vector<Outcome>{o};
        }));

    g.push_back(make_group(
        "decomposition", "decomposition", "symalg",
        {{"standard decomposition reconstructs K with Lambda-free blocks", false}}, false, need_n2,
        [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto K = random_sym<S>(n, k, rng);
          const auto parts = standard_decomposition(K);
          Outcome o = compare(reconstruct(parts), K);
          for (const auto& p : parts) o.merge(is_zero_outcome(lambda_op(p), K.max_abs()));
          // A trace-free input is its own single block.
          const auto K0 = trace_free_part(K);
          const auto tf = standard_decomposition(K0);
          o.merge(compare(tf[0], K0));
          for (std::size_t i = 1; i < tf.size(); ++i) o.merge(is_zero_outcome(tf[i], K0.max_abs()));
          if (k == 2) {
            // e_1^2 = (e_1^2 - L/n) + L (1/n)
            const auto e1sq = sym_mul(SymTensor<S>::frame(n, 0), SymTensor<S>::frame(n, 0));
            const auto p = standard_decomposition(e1sq);
            const S inv_n = scalar<S>(1, n);
            o.merge(Outcome::boolean(p.size() == 2));
            if (p.size() == 2) {
              o.merge(compare(p[0], e1sq - inv_n * metric_l<S>(n)));
              o.merge(compare(p[1], inv_n * SymTensor<S>::one(n)));
            }
          }
          return std::vector<Outcome>{o};
        }));

    // ---- equivariant projections on Sym^k_0 (x) R^n (x) E
    g.push_back(make_group(
        "q1", "projections", "equivariant", {{"q1 q1* = (k+1) id on Sym^(k+1)_0, q1* adjoint to q1", false}}, true,
        need_n2, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const auto K = random_twisted<S>(c.n, c.k + 1, c.r, rng);
          const auto W = random_vector_twisted<S>(c.n, c.k, c.r, rng);
          Outcome o = compare(q1(q1_star(K)), S(scalar<S>(c.k + 1)) * K);
          o.merge(compare_scalar(inner(q1(W), K), inner(W, q1_star(K))));
          return std::vector<Outcome>{o};
        }));

    g.push_back(make_group(
        "q2", "projections", "equivariant",
        {{"q2 q2* = (n+2k-2)(n+k-3)/(n+2k-4) id on Sym^(k-1)_0, q2* adjoint to q2", false}}, true,
        [](const Cell& c) {
          require_domain(c.n >= 2 && c.k >= 1 && c.n + 2 * c.k - 4 != 0, "q2 q2* needs k >= 1 and n + 2k - 4 != 0");
        },
        [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto K = random_twisted<S>(n, k - 1, c.r, rng);
          const auto W = random_vector_twisted<S>(n, k, c.r, rng);
          const S factor = ScalarTraits<S>::from_rational(Rational((n + 2 * k - 2) * (n + k - 3)) / Rational(n + 2 * k - 4));
          Outcome o = compare(q2(q2_star(K)), factor * K);
          o.merge(compare_scalar(inner(q2(W), K), inner(W, q2_star(K))));
          return std::vector<Outcome>{o};
        }));

    g.push_back(make_group(
        "projectors", "projections", "equivariant",
        {{"projector algebra: p1 + p2 + p3 = id, idempotent, mutually orthogonal, self-adjoint", false},
         {"conformal weight B = k p1 - (n+k-2) p2 - p3", false}},
        true, need_projection, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto W = random_vector_twisted<S>(n, k, c.r, rng);
          const auto W2 = random_vector_twisted<S>(n, k, c.r, rng);
          const auto a = p1(W), b = p2(W), cc = p3(W);
          const double s = W.max_abs();
          Outcome o = compare(a + b + cc, W);
          o.merge(compare(p1(a), a));
          o.merge(compare(p2(b), b));
          o.merge(compare(p3(cc), cc));
          o.merge(is_zero_outcome(p2(a), s));
          o.merge(is_zero_outcome(p3(a), s));
          o.merge(is_zero_outcome(p1(b), s));
          o.merge(is_zero_outcome(p3(b), s));
          o.merge(is_zero_outcome(p1(cc), s));
          o.merge(is_zero_outcome(p2(cc), s));
          o.merge(compare_scalar(inner(p1(W), W2), inner(W, p1(W2))));
          o.merge(compare_scalar(inner(p2(W), W2), inner(W, p2(W2))));
          o.merge(compare_scalar(inner(p3(W), W2), inner(W, p3(W2))));
          const auto expected = S(scalar<S>(k)) * a - S(scalar<S>(n + k - 2)) * b - cc;
          Outcome bdec = compare(conf_weight_B(W), expected);
          bdec.merge(compare_scalar(inner(conf_weight_B(W), W2), inner(W, conf_weight_B(W2))));
          return std::vector<Outcome>{o, bdec};
        }));

    // ---- curvature endomorphisms
    g.push_back(make_group(
        "bq", "curvature", "diffops",
        {{"B applied to the Hessian equals q(R) K (untwisted jets)", false},
         {"B applied to the Hessian equals q(R)^E K (twisted jets)", false}},
        true, need_n2, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const auto R = random_curvature<S>(c.n, rng);
          const auto J1 = random_jet<S>(c.n, c.k, 1, R, BundleCurvature<S>(c.n, 1), rng);
          const auto J = generic_jet<S>(c.n, c.k, c.r, rng);
          return std::vector<Outcome>{compare(second_order(EquivariantMap::B, J1), q_R(R, J1.K)),
                                      compare(second_order(EquivariantMap::B, J), q_R_E(J.R, J.RE, J.K))};
        }));

    g.push_back(make_group(
        "qr", "curvature", "equivariant",
        {{"q(R) by its defining sum agrees with the frame formula, including constant curvature -1", false}}, true,
        need_n2, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto R = random_curvature<S>(n, rng);
          const auto Psi = random_twisted<S>(n, k, c.r, rng);
          const auto G = random_sym<S>(n, k, rng);
          Outcome o = compare(q_R(R, Psi), q_R_frame_formula(R, Psi));
          o.merge(compare(q_R(R, G), q_R_frame_formula(R, G)));
          const auto sphere = constant_curvature<S>(n, scalar<S>(-1));
          o.merge(compare(q_R(sphere, Psi), q_R_frame_formula(sphere, Psi)));
          o.merge(compare(q_R(sphere, Psi), S(scalar<S>(k * (n + k - 2))) * Psi));
          return std::vector<Outcome>{o};
        }));

    // ---- first and second order operators on jets
    g.push_back(make_group(
        "confk", "weitzenbock", "diffops",
        {{"conformal Killing certificate: D0 K = 0 iff P1 = 0; divergence-free iff P2 = 0", false}}, true,
        need_projection, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto J = generic_jet<S>(n, k, c.r, rng, JetKind::conformal_killing);
          const double s = J.max_abs();
          Outcome o = is_zero_outcome(op_D0(J), s);
          o.merge(is_zero_outcome(op_P(1, J), s));
          o.merge(compare(op_D(J), S(scalar<S>(-1, n + 2 * k - 2)) * l_op(op_D_star(J))));
          const auto F = random_jet<S>(n, k, c.r, J.R, J.RE, rng, JetKind::divergence_free);
          o.merge(is_zero_outcome(op_D_star(F), F.max_abs()));
          o.merge(is_zero_outcome(op_P(2, F), F.max_abs()));
          // P1 = q1*(D0)/(k+1) and the three pieces sum to the gradient.
          const auto G = generic_jet<S>(n, k, c.r, rng);
          o.merge(compare(op_P(1, G), S(scalar<S>(1, k + 1)) * q1_star(op_D0(G))));
          o.merge(compare(op_P(1, G) + op_P(2, G) + op_P(3, G), G.gradient()));
          return std::vector<Outcome>{o};
        }));

    g.push_back(make_group(
        "weitzenbock", "weitzenbock", "diffops",
        {{"twisted Weitzenbock formula", false}, {"twisted Weitzenbock mutation control", true}}, true,
        [](const Cell& c) { (void)WeitzenbockCoefficients<Rational>::make(c.n, c.k); },
        [](auto tag, const Cell& c, Rng& rng, const RunContext& ctx) {
          using S = typename decltype(tag)::type;
          const auto J = generic_jet<S>(c.n, c.k, c.r, rng);
          const auto terms = weitzenbock_terms(J);
          auto coeffs = WeitzenbockCoefficients<S>::make(c.n, c.k);
          S* slots[3] = {&coeffs.d0_star_d0, &coeffs.d0_d0_star, &coeffs.p3_star_p3};
          const char* names[3] = {"weitzenbock.d0_star_d0", "weitzenbock.d0_d0_star", "weitzenbock.p3_star_p3"};
          for (int m = 0; m < 3; ++m) {
            if (ctx.mutation == names[m]) *slots[m] += scalar<S>(1);
          }
          const auto res = combine(terms, coeffs);
          Outcome o;
          o.zero = res.residual.is_zero();
          o.abs = res.max_abs;
          o.rel = relative(res.max_abs, res.scale);
          std::vector<std::pair<bool, double>> perturbed;
          for (int m = 0; m < 3; ++m) {
            auto cm = coeffs;
            S* sm[3] = {&cm.d0_star_d0, &cm.d0_d0_star, &cm.p3_star_p3};
            *sm[m] += scalar<S>(1);
            const auto rm = combine(terms, cm);
            perturbed.push_back({rm.residual.is_zero(), relative(rm.max_abs, rm.scale)});
          }
          return std::vector<Outcome>{o, control(perturbed, ctx)};
        }));

    // ---- fiber calculus on the unit sphere
    g.push_back(make_group(
        "fiber", "fiber", "fiber",
        {{"pullback is an algebra homomorphism", false},
         {"pullback of L K equals pullback of K", false},
         {"vertical Laplacian eigenvalue k(n+k-2) on pulled-back trace-free tensors", false},
         {"vertical gradient and vertical divergence are L2-adjoint", false}},
        true, need_n2, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k, r = c.r;
          const auto K = random_sym<S>(n, k, rng);
          const auto K2 = random_sym<S>(n, 1 + rng.uniform_int(0, 1), rng);
          const auto xi = random_vector<S>(r, rng);
          const auto A = random_twisted<S>(n, k, r, rng, false);
          const auto B = random_twisted<S>(n, k, r, rng, false);
          Outcome hom = compare(multiply(pullback(TwistedTensor<S>::untwisted(K)), pullback(TwistedTensor<S>::decomposable(K2, xi))),
                                pullback(TwistedTensor<S>::decomposable(sym_mul(K, K2), xi)));
          hom.merge(compare(pullback(A) + pullback(B), pullback(A + B)));
          Outcome linv = compare(pullback(l_op(A)), pullback(A));
          const auto f = pullback(random_twisted<S>(n, k, r, rng));
          Outcome eig = compare(vertical_laplacian(f), S(scalar<S>(k * (n + k - 2))) * f);
          const auto g2 = random_field<S>(n, r, std::max(k, 1), rng);
          const auto W = random_normal<S>(n, r, std::max(k, 1), rng);
          const auto Wt = tangent_projection(W);
          Outcome adj = compare_scalar(l2_inner(vertical_gradient(g2), Wt), l2_inner(g2, vertical_div_star(Wt)));
          adj.merge(compare_scalar(l2_inner(vertical_gradient(g2), W), l2_inner(g2, vertical_adjoint(W))));
          return std::vector<Outcome>{hom, linv, eig, adj};
        }));

    // ---- links between jet operators and fiber operators
    g.push_back(make_group(
        "link_d", "links", "pestov",
        {{"X pi*K = pi*(D K)", false},
         {"X+ pi*K = pi*(D0 K)", false},
         {"X- pi*K = -1/(n+2k-2) pi*(D0* K)", false}},
        true, need_projection, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const auto J = generic_jet<S>(c.n, c.k, c.r, rng);
          return std::vector<Outcome>{
              compare(op_X(J), pullback(op_D(J))), compare(op_X_plus(J), pullback(op_D0(J))),
              compare(op_X_minus(J), S(scalar<S>(-1, c.n + 2 * c.k - 2)) * pullback(op_D0_star(J)))};
        }));

    g.push_back(make_group(
        "link_v", "links", "pestov",
        {{"vertical gradient of pi*Psi plus k pi*Psi v is the pullback of S_k Psi", false},
         {"vertical divergence of w pi*Psi matches the decomposable formula", false}},
        true, need_projection, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto Psi = random_twisted<S>(n, k, c.r, rng);
          const auto f = pullback(Psi);
          const auto split = eq_kp_split(Psi);
          Outcome v1 = compare(split.tangential, vertical_gradient(f));
          NormalField<S> radial(n, c.r);
          for (int a = 0; a < n; ++a) radial.comp(a) = S(scalar<S>(k)) * mul_coordinate(a, f);
          v1.merge(compare(split.radial, radial));
          v1.merge(compare(split.full, split.tangential + split.radial));
          const auto w = random_vector<S>(n, rng);
          Outcome v2 = compare(vertical_div_star(constant_times<S>(w, f)), vertical_div_star_decomposable<S>(w, Psi));
          return std::vector<Outcome>{v1, v2};
        }));

    g.push_back(make_group(
        "link_f", "links", "pestov",
        {{"vertical divergence of R(vertical gradient) is the pullback of q(R)", false},
         {"vertical divergence of F is the pullback of the E-part of q(R)^E", false},
         {"X- X+ = -1/(n+2k) pullback of D0* D0", false},
         {"X+ X- = -1/(n+2k-2) pullback of D0 D0*", false}},
        true, need_projection, [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const int n = c.n, k = c.k;
          const auto J = generic_jet<S>(n, k, c.r, rng);
          const auto rep = link_f_check(J);
          const auto [mp, pm] = second_order_fiber(J);
          return std::vector<Outcome>{compare(rep.r_lhs, rep.r_rhs), compare(rep.f_lhs, rep.f_rhs),
                                      compare(pullback(d0_star_d0(J)), S(scalar<S>(-(n + 2 * k))) * mp),
                                      compare(pullback(d0_d0_star(J)), S(scalar<S>(-(n + 2 * k - 2))) * pm)};
        }));

    g.push_back(make_group(
        "z", "z", "pestov",
        {{"Z_k pi*K = pi*(P3 K)", false}, {"Z_k preserves degree: harmonic support {k}", false}}, true,
        [](const Cell& c) { require_pestov_domain(c.n, c.k); },
        [](auto tag, const Cell& c, Rng& rng, const RunContext&) {
          using S = typename decltype(tag)::type;
          const auto J = generic_jet<S>(c.n, c.k, c.r, rng);
          const auto z = op_Z(J);
          bool ok = z.is_tangent();
          for (int a = 0; a < c.n; ++a) {
            for (int d : z.comp(a).support()) ok = ok && d == c.k;
          }
          return std::vector<Outcome>{compare(z, pullback(op_P(3, J))), Outcome::boolean(ok)};
        }));

    g.push_back(make_group(
        "pestov", "pestov", "pestov",
        {{"localized Pestov identity", false}, {"localized Pestov mutation control", true}}, true,
        [](const Cell& c) { require_pestov_domain(c.n, c.k); },
        [](auto tag, const Cell& c, Rng& rng, const RunContext& ctx) {
          using S = typename decltype(tag)::type;
          const auto J = generic_jet<S>(c.n, c.k, c.r, rng);
          const auto terms = pestov_terms(J);
          auto coeffs = PestovCoefficients<S>::make(c.n, c.k);
          auto slots = [](PestovCoefficients<S>& x) {
            return std::array<S*, 5>{&x.curvature_R, &x.curvature_F, &x.minus_plus, &x.plus_minus, &x.z_star_z};
          };
          const char* names[5] = {"pestov.curvature_R", "pestov.curvature_F", "pestov.minus_plus", "pestov.plus_minus",
                                  "pestov.z_star_z"};
          for (int m = 0; m < 5; ++m) {
            if (ctx.mutation == names[m]) *slots(coeffs)[static_cast<std::size_t>(m)] += scalar<S>(1);
          }
          const auto res = combine(terms, coeffs);
          Outcome o;
          o.zero = res.residual.is_zero();
          o.abs = res.max_abs;
          o.rel = relative(res.max_abs, res.scale);
          std::vector<std::pair<bool, double>> perturbed;
          for (int m = 0; m < 5; ++m) {
            // F vanishes identically on line bundles, so its coefficient is invisible at r = 1.
            if (m == 1 && c.r == 1) continue;
            auto cm = coeffs;
            *slots(cm)[static_cast<std::size_t>(m)] += scalar<S>(1);
            const auto rm = combine(terms, cm);
            perturbed.push_back({rm.residual.is_zero(), relative(rm.max_abs, rm.scale)});
          }
          return std::vector<Outcome>{o, control(perturbed, ctx)};
        }));
    return g;
  }();
  return groups;
}

inline std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& g : identity_groups()) {
    if (std::find(out.begin(), out.end(), g.suite) == out.end()) out.push_back(g.suite);
  }
  return out;
}

// ---- reports

struct CellReport {
  Cell cell;
  int trials = 0;
  Outcome agg;
  std::string status;  // pass | fail | error
  std::string detail;
};

struct ExcludedCell {
  Cell cell;
  std::string reason;
};

struct IdentityReport {
  std::string name;
  std::string suite;
  std::string module;
  bool control = false;
  std::vector<CellReport> cells;
  std::vector<ExcludedCell> excluded;
  std::string status;  // pass | fail | empty
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<IdentityReport> identities;
  std::vector<std::string> suites_without_cells;
  bool pass = true;
  // Run metadata: the only fields that vary between identical configs.
  std::string timestamp;
  double wall_seconds = 0;
  int threads = 1;
};

inline int default_threads() {
  if (const char* env = std::getenv("SYMFIBER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void validate_config(const SuiteConfig& cfg) {
  auto check_range = [](const IntRange& r, const char* what, int min, int max) {
    if (r.empty()) return;
    if (r.lo < min || r.hi > max) {
      throw UsageError(std::string(what) + " range " + range_str(r) + " outside [" + std::to_string(min) + ", " +
                       std::to_string(max) + "]");
    }
  };
  check_range(cfg.n, "n", 1, 12);
  check_range(cfg.k, "k", 0, 12);
  check_range(cfg.r, "r", 1, 8);
  if (cfg.trials < 1) throw UsageError("trials must be >= 1");
  if (!(cfg.tol > 0) || !std::isfinite(cfg.tol)) throw UsageError("tol must be a positive finite number");
  const auto known = suite_names();
  for (const auto& s : cfg.suites) {
    if (std::find(known.begin(), known.end(), s) == known.end()) throw UsageError("unknown suite '" + s + "'");
  }
  if (!cfg.mutation.empty()) {
    const auto& m = mutation_names();
    if (std::find(m.begin(), m.end(), cfg.mutation) == m.end()) throw UsageError("unknown mutation '" + cfg.mutation + "'");
  }
}

/// Runs fn(i) for i in [0, count) on `threads` workers.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (t == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline SuiteReport run_suite(const SuiteConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const RunContext ctx{cfg.mode, cfg.tol, cfg.mutation};

  struct Task {
    const IdentityGroup* group;
    std::size_t report_base;  // index of the group's first identity in the report
    Cell cell;
  };
  SuiteReport rep;
  rep.config = cfg;
  rep.threads = cfg.threads > 0 ? cfg.threads : default_threads();

  std::vector<Task> tasks;
  std::vector<std::vector<std::size_t>> task_slots;  // identity report index -> task indices
  std::map<std::string, int> runnable_per_suite;
  for (const auto& g : identity_groups()) {
    if (!cfg.suites.empty() && std::find(cfg.suites.begin(), cfg.suites.end(), g.suite) == cfg.suites.end()) continue;
    runnable_per_suite.try_emplace(g.suite, 0);
    const std::size_t base = rep.identities.size();
    for (std::size_t i = 0; i < g.identities.size(); ++i) {
      IdentityReport ir;
      ir.name = g.identities[i];
      ir.suite = g.suite;
      ir.module = g.module;
      ir.control = g.controls[i];
      rep.identities.push_back(std::move(ir));
    }
    const IntRange rr = g.uses_r ? cfg.r : IntRange{0, cfg.r.empty() ? -1 : 0};
    for (int n = cfg.n.lo; n <= cfg.n.hi; ++n)
      for (int k = cfg.k.lo; k <= cfg.k.hi; ++k)
        for (int r = rr.lo; r <= rr.hi; ++r) {
          const Cell cell{n, k, r};
          try {
            g.domain(cell);
          } catch (const DomainError& e) {
            for (std::size_t i = 0; i < g.identities.size(); ++i) rep.identities[base + i].excluded.push_back({cell, e.what()});
            continue;
          }
          ++runnable_per_suite[g.suite];
          tasks.push_back({&g, base, cell});
        }
  }

  // One result vector per task; filled by workers, read single-threaded after.
  std::vector<std::vector<CellReport>> results(tasks.size());
  parallel_for(tasks.size(), rep.threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    const IdentityGroup& g = *task.group;
    std::vector<CellReport> out(g.identities.size());
    for (auto& cr : out) cr.cell = task.cell;
    try {
      for (int trial = 0; trial < cfg.trials; ++trial) {
        Rng rng(mix_seed({cfg.seed, harness_detail::fnv1a(g.key), static_cast<std::uint64_t>(task.cell.n),
                          static_cast<std::uint64_t>(task.cell.k), static_cast<std::uint64_t>(task.cell.r),
                          static_cast<std::uint64_t>(trial)}));
        const auto outcomes = cfg.mode == ScalarMode::rational ? g.run_rational(task.cell, rng, ctx)
                                                               : g.run_float(task.cell, rng, ctx);
        for (std::size_t i = 0; i < out.size(); ++i) {
          out[i].agg.merge(outcomes[i]);
          ++out[i].trials;
        }
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        auto& cr = out[i];
        bool ok;
        if (g.controls[i]) {
          ok = cr.agg.attempted > 0 && cr.agg.detected * 100 >= cr.agg.attempted * 95;
          cr.detail = std::to_string(cr.agg.detected) + "/" + std::to_string(cr.agg.attempted) + " perturbations detected";
        } else {
          ok = ctx.passes(cr.agg);
        }
        cr.status = ok ? "pass" : "fail";
      }
    } catch (const std::exception& e) {
      for (auto& cr : out) {
        cr.status = "error";
        cr.detail = e.what();
      }
    }
    results[t] = std::move(out);
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (std::size_t i = 0; i < results[t].size(); ++i) rep.identities[tasks[t].report_base + i].cells.push_back(results[t][i]);
  }
  for (auto& ir : rep.identities) {
    ir.status = ir.cells.empty() ? "empty" : "pass";
    for (const auto& c : ir.cells) {
      if (c.status != "pass") ir.status = "fail";
    }
    if (ir.status == "fail") rep.pass = false;
  }
  for (const auto& [suite, count] : runnable_per_suite) {
    if (count == 0) rep.suites_without_cells.push_back(suite);
  }
  rep.timestamp = utc_timestamp();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---- serialization

inline Json cell_json(const Cell& c) {
  return {{"n", c.n}, {"k", c.k}, {"r", c.r == 0 ? Json(nullptr) : Json(c.r)}};
}

inline Json config_json(const SuiteConfig& cfg) {
  Json suites = Json::array();
  for (const auto& s : cfg.suites) suites.push_back(s);
  return {{"n_range", range_str(cfg.n)},
          {"k_range", range_str(cfg.k)},
          {"r_range", range_str(cfg.r)},
          {"trials", cfg.trials},
          {"mode", std::string(mode_name(cfg.mode))},
          {"tol", cfg.mode == ScalarMode::floating ? Json(cfg.tol) : Json(nullptr)},
          {"seed", std::to_string(cfg.seed)},
          {"suites", suites.empty() ? Json("all") : suites},
          {"mutation", cfg.mutation.empty() ? Json(nullptr) : Json(cfg.mutation)}};
}

/// Report JSON. Everything except the "run" object is a function of the config.
inline Json to_json(const SuiteReport& rep, bool include_run = true) {
  Json ids = Json::array();
  std::size_t cells = 0, excluded = 0, failed = 0;
  for (const auto& ir : rep.identities) {
    Json jc = Json::array(), je = Json::array();
    for (const auto& c : ir.cells) {
      Json x = cell_json(c.cell);
      x["trials"] = c.trials;
      x["max_residual"] = c.agg.abs;
      x["max_relative_residual"] = std::isfinite(c.agg.rel) ? Json(c.agg.rel) : Json("inf");
      x["exact_zero"] = c.agg.zero;
      if (ir.control) {
        x["detected"] = c.agg.detected;
        x["attempted"] = c.agg.attempted;
      }
      x["status"] = c.status;
      if (!c.detail.empty()) x["detail"] = c.detail;
      jc.push_back(std::move(x));
    }
    for (const auto& e : ir.excluded) {
      Json x = cell_json(e.cell);
      x["reason"] = e.reason;
      je.push_back(std::move(x));
    }
    cells += ir.cells.size();
    excluded += ir.excluded.size();
    if (ir.status == "fail") ++failed;
    ids.push_back({{"name", ir.name},
                   {"suite", ir.suite},
                   {"module", ir.module},
                   {"kind", ir.control ? "negative_control" : "identity"},
                   {"norm_type", "max_abs_coefficient"},
                   {"status", ir.status},
                   {"cells", std::move(jc)},
                   {"excluded", std::move(je)}});
  }
  Json out = {{"schema", kReportSchema},
              {"schema_version", kReportSchemaVersion},
              {"status", rep.pass ? "pass" : "fail"},
              {"config", config_json(rep.config)},
              {"environment",
               {{"library_version", kLibraryVersion},
                {"compiler", __VERSION__},
                {"gmp_version", gmp_version},
                {"cxx_standard", static_cast<long>(__cplusplus)}}},
              {"summary",
               {{"identities", rep.identities.size()},
                {"cells_run", cells},
                {"cells_excluded", excluded},
                {"identities_failed", failed},
                {"suites_without_cells", rep.suites_without_cells}}},
              {"identities", std::move(ids)}};
  if (include_run) {
    out["run"] = {{"timestamp", rep.timestamp}, {"wall_seconds", rep.wall_seconds}, {"threads", rep.threads}};
  }
  return out;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// One row per (identity, cell), excluded cells included.
inline std::string to_csv(const SuiteReport& rep) {
  std::ostringstream os;
  os << "identity,suite,kind,n,k,r,trials,max_residual,max_relative_residual,status,detail\n";
  auto num = [](double x) {
    if (!std::isfinite(x)) return std::string("inf");
    return ScalarTraits<double>::to_string(x);
  };
  for (const auto& ir : rep.identities) {
    const std::string head = csv_quote(ir.name) + "," + ir.suite + "," + (ir.control ? "negative_control" : "identity");
    auto rcol = [](const Cell& c) { return c.r == 0 ? std::string() : std::to_string(c.r); };
    for (const auto& c : ir.cells) {
      os << head << "," << c.cell.n << "," << c.cell.k << "," << rcol(c.cell) << "," << c.trials << "," << num(c.agg.abs)
         << "," << num(c.agg.rel) << "," << c.status << "," << csv_quote(c.detail) << "\n";
    }
    for (const auto& e : ir.excluded) {
      os << head << "," << e.cell.n << "," << e.cell.k << "," << rcol(e.cell) << ",0,,,excluded," << csv_quote(e.reason)
         << "\n";
    }
  }
  return os.str();
}

}  // namespace symfiber
