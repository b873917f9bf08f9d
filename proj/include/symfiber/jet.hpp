#pragma once

// Pointwise 2-jets (K, nabla K, nabla^2 K) of twisted symmetric tensor fields.
//
// d2K(i, j) stands for nabla^2_{e_i, e_j} K. A valid jet satisfies
// d2K(i,j) - d2K(j,i) = R_{ij} K, where R_{ij} acts on the Sym slot through R
// and on the E slot through RE.

#include <sstream>
#include <string>
#include <vector>

#include "symfiber/equivariant.hpp"

namespace symfiber {

template <Scalar S>
struct SectionJet2 {
  int n = 0;
  int k = 0;
  int r = 1;
  bool trace_free = true;  // false only for general Sym^k jets (r = 1)
  TwistedTensor<S> K;
  std::vector<TwistedTensor<S>> dK;   // n entries
  std::vector<TwistedTensor<S>> d2K;  // n*n entries, row-major in (i, j)
  AlgCurvature<S> R;
  BundleCurvature<S> RE;

  const TwistedTensor<S>& d2(int i, int j) const { return d2K[static_cast<std::size_t>(i * n + j)]; }
  TwistedTensor<S>& d2(int i, int j) { return d2K[static_cast<std::size_t>(i * n + j)]; }
  const TwistedTensor<S>& d1(int i) const { return dK[static_cast<std::size_t>(i)]; }
  TwistedTensor<S>& d1(int i) { return dK[static_cast<std::size_t>(i)]; }

  /// The gradient page sum_i e_i (x) dK(i).
  VectorTwistedTensor<S> gradient() const { return VectorTwistedTensor<S>(dK); }
  /// Row i of the Hessian as sum_j e_j (x) d2K(i, j).
  VectorTwistedTensor<S> hessian_row(int i) const {
    std::vector<TwistedTensor<S>> row;
    for (int j = 0; j < n; ++j) row.push_back(d2(i, j));
    return VectorTwistedTensor<S>(std::move(row));
  }

  double max_abs() const {
    double m = K.max_abs();
    for (const auto& t : dK) m = std::max(m, t.max_abs());
    for (const auto& t : d2K) m = std::max(m, t.max_abs());
    return m;
  }
};

struct JetViolation {
  std::string invariant;
  std::string location;
  double magnitude = 0;
};

/// Lists every violated jet invariant; empty iff valid. Never throws on shape-consistent input.
template <Scalar S>
std::vector<JetViolation> validate_jet(const SectionJet2<S>& J) {
  std::vector<JetViolation> out;
  auto shape_ok = [&](const TwistedTensor<S>& t) { return t.n() == J.n && t.degree() == J.k && t.rank() == J.r; };
  if (static_cast<int>(J.dK.size()) != J.n || static_cast<int>(J.d2K.size()) != J.n * J.n) {
    out.push_back({"shape", "derivative arrays", 1.0});
    return out;
  }
  if (!shape_ok(J.K)) out.push_back({"shape", "K", 1.0});
  for (int i = 0; i < J.n; ++i) {
    if (!shape_ok(J.d1(i))) out.push_back({"shape", "dK(" + std::to_string(i) + ")", 1.0});
    for (int j = 0; j < J.n; ++j) {
      if (!shape_ok(J.d2(i, j))) out.push_back({"shape", "d2K(" + std::to_string(i) + "," + std::to_string(j) + ")", 1.0});
    }
  }
  if (J.R.n() != J.n || J.RE.n() != J.n || J.RE.rank() != J.r) out.push_back({"shape", "curvature dimensions", 1.0});
  if (!out.empty()) return out;

  for (const auto& c : check_curvature(J.R)) out.push_back({"curvature symmetry", c.what, c.magnitude});
  for (const auto& c : check_bundle_curvature(J.RE)) out.push_back({"bundle curvature skewness", c.what, c.magnitude});

  if (J.trace_free) {
    auto trace = [&](const TwistedTensor<S>& t, const std::string& where) {
      const double m = lambda_op(t).max_abs();
      if (m > 0) out.push_back({"trace-free (Lambda = 0)", where, m});
    };
    trace(J.K, "K");
    for (int i = 0; i < J.n; ++i) trace(J.d1(i), "dK(" + std::to_string(i) + ")");
    for (int i = 0; i < J.n; ++i) {
      for (int j = 0; j < J.n; ++j) trace(J.d2(i, j), "d2K(" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  for (int i = 0; i < J.n; ++i) {
    for (int j = i + 1; j < J.n; ++j) {
      TwistedTensor<S> diff = J.d2(i, j) - J.d2(j, i) - full_curvature_action(J.R, J.RE, i, j, J.K);
      const double m = diff.max_abs();
      if (m > 0) out.push_back({"curvature commutation", "(" + std::to_string(i) + "," + std::to_string(j) + ")", m});
    }
  }
  return out;
}

/// Jet with the given value data; the antisymmetric part of d2K is filled in from (R, RE).
/// `sym` must hold n*n entries with sym(i,j) = sym(j,i); only the upper triangle is read.
template <Scalar S>
SectionJet2<S> assemble_jet(const AlgCurvature<S>& R, const BundleCurvature<S>& RE, TwistedTensor<S> K,
                            std::vector<TwistedTensor<S>> dK, const std::vector<TwistedTensor<S>>& sym,
                            bool trace_free = true) {
  SectionJet2<S> J;
  J.n = K.n();
  J.k = K.degree();
  J.r = K.rank();
  J.trace_free = trace_free;
  J.R = R;
  J.RE = RE;
  J.K = std::move(K);
  J.dK = std::move(dK);
  J.d2K.assign(static_cast<std::size_t>(J.n * J.n), TwistedTensor<S>(J.n, J.k, J.r));
  const S half = scalar<S>(1, 2);
  for (int i = 0; i < J.n; ++i) {
    for (int j = i; j < J.n; ++j) {
      const TwistedTensor<S>& s = sym[static_cast<std::size_t>(i * J.n + j)];
      if (i == j) {
        J.d2(i, i) = s;
        continue;
      }
      TwistedTensor<S> a = half * full_curvature_action(R, RE, i, j, J.K);
      J.d2(i, j) = s + a;
      J.d2(j, i) = s - a;
    }
  }
  return J;
}

enum class JetKind {
  generic,           // random trace-free data
  parallel,          // dK = 0 and symmetric part of d2K = 0
  conformal_killing, // gradient page has no p1 component, so D0 K = 0
  divergence_free,   // gradient page has no p2 component, so D* K = 0
  general_sym,       // untwisted, not trace-free; for commutator identities
};

template <Scalar S>
SectionJet2<S> random_jet(int n, int k, int r, const AlgCurvature<S>& R, const BundleCurvature<S>& RE, Rng& rng,
                          JetKind kind = JetKind::generic) {
  require_domain(n >= 2 && k >= 0 && r >= 1, "random_jet: need n >= 2, k >= 0, r >= 1");
  require_dims(R.n() == n && RE.n() == n && RE.rank() == r, "random_jet: curvature shape mismatch");
  const bool tf = kind != JetKind::general_sym;
  if (!tf) require_dims(r == 1, "general Sym^k jets are untwisted (r = 1)");
  TwistedTensor<S> K = random_twisted<S>(n, k, r, rng, tf);
  std::vector<TwistedTensor<S>> dK;
  for (int i = 0; i < n; ++i) {
    dK.push_back(kind == JetKind::parallel ? TwistedTensor<S>(n, k, r) : random_twisted<S>(n, k, r, rng, tf));
  }
  if (kind == JetKind::conformal_killing || kind == JetKind::divergence_free) {
    VectorTwistedTensor<S> W(std::move(dK));
    W = W - (kind == JetKind::conformal_killing ? p1(W) : p2(W));
    dK = W.comps();
  }
  std::vector<TwistedTensor<S>> sym(static_cast<std::size_t>(n * n), TwistedTensor<S>(n, k, r));
  if (kind != JetKind::parallel) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) sym[static_cast<std::size_t>(i * n + j)] = random_twisted<S>(n, k, r, rng, tf);
    }
  }
  return assemble_jet(R, RE, std::move(K), std::move(dK), sym, tf);
}

/// Applies a linear map of the Sym slot to every entry of the jet (used for Lambda, L on general jets).
template <Scalar S, class F>
SectionJet2<S> map_jet(const SectionJet2<S>& J, F&& f) {
  SectionJet2<S> out = J;
  out.K = map_slots(J.K, f);
  for (auto& t : out.dK) t = map_slots(t, f);
  for (auto& t : out.d2K) t = map_slots(t, f);
  out.k = out.K.degree();
  out.trace_free = false;
  return out;
}

template <Scalar T>
SectionJet2<T> convert(const SectionJet2<Rational>& J) {
  SectionJet2<T> out;
  out.n = J.n;
  out.k = J.k;
  out.r = J.r;
  out.trace_free = J.trace_free;
  out.K = convert<T>(J.K);
  for (const auto& t : J.dK) out.dK.push_back(convert<T>(t));
  for (const auto& t : J.d2K) out.d2K.push_back(convert<T>(t));
  out.R = convert<T>(J.R);
  out.RE = convert<T>(J.RE);
  return out;
}

inline std::string describe(const std::vector<JetViolation>& v) {
  std::ostringstream os;
  for (const auto& x : v) os << x.invariant << " at " << x.location << " (" << x.magnitude << ")\n";
  return os.str();
}

}  // namespace symfiber
