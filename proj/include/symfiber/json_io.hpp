#pragma once

// JSON encodings of the value types. Rationals are written as "p/q" strings,
// floats as numbers; readers accept either form in both modes. Indices are
// 0-based. Every reader throws SchemaError whose message starts with a JSON
// pointer to the offending field.

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <vector>

#include "symfiber/fiber.hpp"
#include "symfiber/jet.hpp"

namespace symfiber {

using Json = nlohmann::json;

namespace json_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw SchemaError((path.empty() ? std::string("/") : path) + ": " + what);
}

inline const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

inline int get_int(const Json& j, const std::string& path, int lo, int hi) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo || v > hi) {
    fail(path, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

inline int int_field(const Json& j, const char* key, const std::string& path, int lo, int hi) {
  return get_int(field(j, key, path), path + "/" + key, lo, hi);
}

inline const Json& array_field(const Json& j, const char* key, const std::string& path) {
  const Json& a = field(j, key, path);
  if (!a.is_array()) fail(path + "/" + key, "expected an array");
  return a;
}

inline std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

// Dimension caps keep malformed input from allocating absurd bases.
constexpr int kMaxN = 32;
constexpr int kMaxK = 64;
constexpr int kMaxR = 64;

}  // namespace json_detail

template <Scalar S>
Json scalar_to_json(const S& x) {
  if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) {
    return ScalarTraits<S>::to_string(x);
  } else {
    return x;
  }
}

template <Scalar S>
S scalar_from_json(const Json& j, const std::string& path) {
  try {
    if (j.is_string()) return ScalarTraits<S>::parse(j.get<std::string>());
    if (j.is_number_integer()) return ScalarTraits<S>::from_rational(Rational(j.get<long>()));
    if (j.is_number_float()) {
      const double d = j.get<double>();
      if (!std::isfinite(d)) json_detail::fail(path, "non-finite number");
      if constexpr (ScalarTraits<S>::mode == ScalarMode::rational) {
        return Rational(d);  // exact binary value
      } else {
        return d;
      }
    }
  } catch (const SchemaError& e) {
    if (std::string(e.what()).starts_with("/")) throw;
    json_detail::fail(path, e.what());
  }
  json_detail::fail(path, "expected a number or a \"p/q\" string");
}

// ---- SymTensor / TwistedTensor: {"n","k",["r"],"coeffs":[{"alpha",["e"],"value"}]}

template <Scalar S>
Json to_json(const SymTensor<S>& K) {
  Json coeffs = Json::array();
  for (std::size_t a = 0; a < K.size(); ++a) {
    if (is_zero(K[a])) continue;
    coeffs.push_back({{"alpha", K.basis()[a].entries()}, {"value", scalar_to_json(K[a])}});
  }
  return {{"n", K.n()}, {"k", K.degree()}, {"coeffs", std::move(coeffs)}};
}

template <Scalar S>
Json to_json(const TwistedTensor<S>& T) {
  Json coeffs = Json::array();
  for (int e = 0; e < T.rank(); ++e) {
    const auto& K = T.slot(e);
    for (std::size_t a = 0; a < K.size(); ++a) {
      if (is_zero(K[a])) continue;
      coeffs.push_back({{"alpha", K.basis()[a].entries()}, {"e", e}, {"value", scalar_to_json(K[a])}});
    }
  }
  return {{"n", T.n()}, {"k", T.degree()}, {"r", T.rank()}, {"coeffs", std::move(coeffs)}};
}

namespace json_detail {

template <Scalar S>
void read_coeffs(const Json& j, const std::string& path, int n, int k, int r, bool twisted,
                 std::vector<Vec<S>>& slots) {
  const MonomialBasis& basis = MonomialBasis::get(n, k);
  slots.assign(static_cast<std::size_t>(r), Vec<S>(basis.size(), scalar<S>(0)));
  std::set<std::pair<int, std::size_t>> seen;
  const Json& coeffs = array_field(j, "coeffs", path);
  for (std::size_t c = 0; c < coeffs.size(); ++c) {
    const std::string cp = at(path + "/coeffs", c);
    const Json& alpha = field(coeffs[c], "alpha", cp);
    if (!alpha.is_array() || static_cast<int>(alpha.size()) != n) {
      fail(cp + "/alpha", "expected an array of n = " + std::to_string(n) + " integers");
    }
    std::vector<int> a(static_cast<std::size_t>(n));
    int deg = 0;
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = get_int(alpha[static_cast<std::size_t>(i)], at(cp + "/alpha", static_cast<std::size_t>(i)), 0, kMaxK);
      deg += a[static_cast<std::size_t>(i)];
    }
    if (deg != k) fail(cp + "/alpha", "degree " + std::to_string(deg) + " differs from k = " + std::to_string(k));
    int e = 0;
    if (twisted) {
      e = int_field(coeffs[c], "e", cp, 0, r - 1);
    } else if (coeffs[c].contains("e")) {
      fail(cp + "/e", "untwisted tensor has no E index");
    }
    const std::size_t idx = basis.rank(MultiIndex(a));
    if (!seen.insert({e, idx}).second) fail(cp, "duplicate coefficient");
    slots[static_cast<std::size_t>(e)][idx] = scalar_from_json<S>(field(coeffs[c], "value", cp), cp + "/value");
  }
}

}  // namespace json_detail

template <Scalar S>
SymTensor<S> sym_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  const int n = int_field(j, "n", path, 1, kMaxN);
  const int k = int_field(j, "k", path, 0, kMaxK);
  std::vector<Vec<S>> slots;
  read_coeffs<S>(j, path, n, k, 1, false, slots);
  return SymTensor<S>(n, k, std::move(slots[0]));
}

template <Scalar S>
TwistedTensor<S> twisted_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  const int n = int_field(j, "n", path, 1, kMaxN);
  const int k = int_field(j, "k", path, 0, kMaxK);
  const int r = int_field(j, "r", path, 1, kMaxR);
  std::vector<Vec<S>> slots;
  read_coeffs<S>(j, path, n, k, r, true, slots);
  std::vector<SymTensor<S>> out;
  for (auto& s : slots) out.emplace_back(n, k, std::move(s));
  return TwistedTensor<S>(std::move(out));
}

// ---- AlgCurvature: {"n","components":[[i,j,k,l,value]]}, one entry per orbit of
// the pair symmetries (i<j, k<l, (i,j) <= (k,l)); readers fill in the orbit.

template <Scalar S>
Json to_json(const AlgCurvature<S>& R) {
  const int n = R.n();
  Json comps = Json::array();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          if (std::pair(i, j) > std::pair(k, l) || is_zero(R(i, j, k, l))) continue;
          comps.push_back({i, j, k, l, scalar_to_json(R(i, j, k, l))});
        }
  return {{"n", n}, {"components", std::move(comps)}};
}

template <Scalar S>
AlgCurvature<S> curvature_from_json(const Json& j, const std::string& path = "", bool check = true) {
  using namespace json_detail;
  const int n = int_field(j, "n", path, 1, kMaxN);
  AlgCurvature<S> R(n);
  const Json& comps = array_field(j, "components", path);
  std::set<std::array<int, 4>> seen;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const std::string cp = at(path + "/components", c);
    if (!comps[c].is_array() || comps[c].size() != 5) fail(cp, "expected [i, j, k, l, value]");
    std::array<int, 4> ix{};
    for (std::size_t t = 0; t < 4; ++t) ix[t] = get_int(comps[c][t], at(cp, t), 0, n - 1);
    auto [i, jj, k, l] = ix;
    if (i == jj || k == l) fail(cp, "entry with a repeated index in a skew pair");
    // Canonical representative of the orbit, to catch duplicates.
    S v = scalar_from_json<S>(comps[c][4], at(cp, 4));
    if (i > jj) { std::swap(i, jj); v = -v; }
    if (k > l) { std::swap(k, l); v = -v; }
    if (std::pair(i, jj) > std::pair(k, l)) { std::swap(i, k); std::swap(jj, l); }
    if (!seen.insert({i, jj, k, l}).second) fail(cp, "duplicate component (same symmetry orbit)");
    R.set_symmetric(i, jj, k, l, v);
  }
  if (check) {
    // float input carries rounding in the Bianchi sums; rational input must be exact
    const double slack = ScalarTraits<S>::mode == ScalarMode::rational ? 0.0 : 1e-12 * std::max(1.0, R.max_abs());
    for (const auto& issue : check_curvature(R)) {
      if (issue.magnitude > slack) fail(path + "/components", "not an algebraic curvature tensor: " + issue.what);
    }
  }
  return R;
}

// ---- BundleCurvature: {"n","r","components":[[i,j,a,b,value]]} with i<j, a<b.

template <Scalar S>
Json to_json(const BundleCurvature<S>& RE) {
  const int n = RE.n(), r = RE.rank();
  Json comps = Json::array();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
          if (is_zero(RE(i, j)(a, b))) continue;
          comps.push_back({i, j, a, b, scalar_to_json(RE(i, j)(a, b))});
        }
  return {{"n", n}, {"r", r}, {"components", std::move(comps)}};
}

template <Scalar S>
BundleCurvature<S> bundle_curvature_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  const int n = int_field(j, "n", path, 1, kMaxN);
  const int r = int_field(j, "r", path, 1, kMaxR);
  BundleCurvature<S> RE(n, r);
  const Json& comps = array_field(j, "components", path);
  std::set<std::array<int, 4>> seen;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const std::string cp = at(path + "/components", c);
    if (!comps[c].is_array() || comps[c].size() != 5) fail(cp, "expected [i, j, a, b, value]");
    int i = get_int(comps[c][0], at(cp, 0), 0, n - 1), jj = get_int(comps[c][1], at(cp, 1), 0, n - 1);
    int a = get_int(comps[c][2], at(cp, 2), 0, r - 1), b = get_int(comps[c][3], at(cp, 3), 0, r - 1);
    if (i == jj || a == b) fail(cp, "entry with a repeated index in a skew pair");
    S v = scalar_from_json<S>(comps[c][4], at(cp, 4));
    if (i > jj) { std::swap(i, jj); v = -v; }
    if (a > b) { std::swap(a, b); v = -v; }
    if (!seen.insert({i, jj, a, b}).second) fail(cp, "duplicate component");
    RE.set_skew(i, jj, a, b, v);
  }
  return RE;
}

// ---- SectionJet2: {"n","k","r","trace_free","K","dK":[..n],"d2K":[[..n]..n],"R","RE"}

template <Scalar S>
Json to_json(const SectionJet2<S>& J) {
  Json dK = Json::array(), d2K = Json::array();
  for (int i = 0; i < J.n; ++i) {
    dK.push_back(to_json(J.d1(i)));
    Json row = Json::array();
    for (int j = 0; j < J.n; ++j) row.push_back(to_json(J.d2(i, j)));
    d2K.push_back(std::move(row));
  }
  return {{"n", J.n}, {"k", J.k}, {"r", J.r}, {"trace_free", J.trace_free}, {"K", to_json(J.K)},
          {"dK", std::move(dK)}, {"d2K", std::move(d2K)}, {"R", to_json(J.R)}, {"RE", to_json(J.RE)}};
}

/// Structural read only; call validate_jet for the commutation and trace invariants.
template <Scalar S>
SectionJet2<S> jet_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  SectionJet2<S> J;
  J.n = int_field(j, "n", path, 1, kMaxN);
  J.k = int_field(j, "k", path, 0, kMaxK);
  J.r = int_field(j, "r", path, 1, kMaxR);
  if (j.contains("trace_free")) {
    if (!j["trace_free"].is_boolean()) fail(path + "/trace_free", "expected a boolean");
    J.trace_free = j["trace_free"].get<bool>();
  }
  auto shaped = [&](const Json& t, const std::string& p) {
    auto T = twisted_from_json<S>(t, p);
    if (T.n() != J.n || T.degree() != J.k || T.rank() != J.r) fail(p, "shape differs from the jet's (n, k, r)");
    return T;
  };
  J.K = shaped(field(j, "K", path), path + "/K");
  const Json& dK = array_field(j, "dK", path);
  if (static_cast<int>(dK.size()) != J.n) fail(path + "/dK", "expected n entries");
  for (std::size_t i = 0; i < dK.size(); ++i) J.dK.push_back(shaped(dK[i], at(path + "/dK", i)));
  const Json& d2K = array_field(j, "d2K", path);
  if (static_cast<int>(d2K.size()) != J.n) fail(path + "/d2K", "expected n rows");
  for (std::size_t i = 0; i < d2K.size(); ++i) {
    const std::string rp = at(path + "/d2K", i);
    if (!d2K[i].is_array() || static_cast<int>(d2K[i].size()) != J.n) fail(rp, "expected a row of n entries");
    for (std::size_t jj = 0; jj < d2K[i].size(); ++jj) J.d2K.push_back(shaped(d2K[i][jj], at(rp, jj)));
  }
  J.R = curvature_from_json<S>(field(j, "R", path), path + "/R");
  if (J.R.n() != J.n) fail(path + "/R/n", "differs from the jet's n");
  J.RE = bundle_curvature_from_json<S>(field(j, "RE", path), path + "/RE");
  if (J.RE.n() != J.n || J.RE.rank() != J.r) fail(path + "/RE", "dimensions differ from the jet's (n, r)");
  return J;
}

// ---- FiberField: {"n","r","components":[{"degree","coeffs"}]}; each component is
// a trace-free tensor (harmonic on the sphere). NormalField: {"n","r","components":[FiberField..n]}.

template <Scalar S>
Json to_json(const FiberField<S>& f) {
  Json comps = Json::array();
  for (const auto& [d, H] : f.components()) {
    Json t = to_json(H);
    comps.push_back({{"degree", d}, {"coeffs", std::move(t["coeffs"])}});
  }
  return {{"n", f.n()}, {"r", f.rank()}, {"components", std::move(comps)}};
}

template <Scalar S>
FiberField<S> fiber_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  const int n = int_field(j, "n", path, 2, kMaxN);
  const int r = int_field(j, "r", path, 1, kMaxR);
  FiberField<S> f(n, r);
  std::set<int> seen;
  const Json& comps = array_field(j, "components", path);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const std::string cp = at(path + "/components", c);
    const int d = int_field(comps[c], "degree", cp, 0, kMaxK);
    if (!seen.insert(d).second) fail(cp + "/degree", "duplicate degree");
    std::vector<Vec<S>> slots;
    read_coeffs<S>(comps[c], cp, n, d, r, true, slots);
    std::vector<SymTensor<S>> parts;
    for (auto& s : slots) parts.emplace_back(n, d, std::move(s));
    TwistedTensor<S> H(std::move(parts));
    if (!H.is_trace_free()) fail(cp, "component is not trace-free (not harmonic)");
    f += FiberField<S>::harmonic(H);
  }
  return f;
}

template <Scalar S>
Json to_json(const NormalField<S>& W) {
  Json comps = Json::array();
  for (const auto& f : W.comps()) comps.push_back(to_json(f));
  return {{"n", W.n()}, {"r", W.rank()}, {"components", std::move(comps)}};
}

template <Scalar S>
NormalField<S> normal_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  const int n = int_field(j, "n", path, 2, kMaxN);
  const int r = int_field(j, "r", path, 1, kMaxR);
  const Json& comps = array_field(j, "components", path);
  if (static_cast<int>(comps.size()) != n) fail(path + "/components", "expected n components");
  std::vector<FiberField<S>> out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    auto f = fiber_from_json<S>(comps[c], at(path + "/components", c));
    if (f.n() != n || f.rank() != r) fail(at(path + "/components", c), "dimensions differ from the field's (n, r)");
    out.push_back(std::move(f));
  }
  return NormalField<S>(std::move(out));
}

/// Parses text, turning syntax errors into SchemaError.
inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("/: malformed JSON: ") + e.what());
  }
}

}  // namespace symfiber
