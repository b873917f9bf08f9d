#pragma once

// Sym^k T (x) E and T (x) Sym^k T (x) E with E = R^r.

#include <functional>
#include <string>
#include <vector>

#include "symfiber/sym_tensor.hpp"

namespace symfiber {

/// r x r matrix acting on the E factor; row-major.
template <Scalar S>
struct EMatrix {
  int r = 0;
  Vec<S> entries;

  EMatrix() = default;
  explicit EMatrix(int rank) : r(rank), entries(static_cast<std::size_t>(rank * rank), scalar<S>(0)) {}
  const S& operator()(int a, int b) const { return entries[static_cast<std::size_t>(a * r + b)]; }
  S& operator()(int a, int b) { return entries[static_cast<std::size_t>(a * r + b)]; }
  bool is_zero() const {
    for (const auto& x : entries) {
      if (!symfiber::is_zero(x)) return false;
    }
    return true;
  }
};

/// Element of Sym^k T (x) E: one SymTensor per E basis vector.
template <Scalar S>
class TwistedTensor {
 public:
  TwistedTensor() : TwistedTensor(1, 0, 1) {}
  TwistedTensor(int n, int k, int r) : r_(r), slots_(static_cast<std::size_t>(r), SymTensor<S>(n, k)) {
    require_dims(r >= 1, "TwistedTensor requires r >= 1");
  }
  explicit TwistedTensor(std::vector<SymTensor<S>> slots) : r_(static_cast<int>(slots.size())), slots_(std::move(slots)) {
    require_dims(r_ >= 1, "TwistedTensor requires r >= 1");
    for (const auto& s : slots_) {
      require_dims(s.n() == slots_[0].n() && s.degree() == slots_[0].degree(), "TwistedTensor slots disagree in (n,k)");
    }
  }
  /// K (x) xi
  static TwistedTensor decomposable(const SymTensor<S>& K, std::type_identity_t<std::span<const S>> xi) {
    std::vector<SymTensor<S>> slots;
    for (const S& x : xi) slots.push_back(x * K);
    return TwistedTensor(std::move(slots));
  }
  /// Untwisted tensor viewed with r = 1.
  static TwistedTensor untwisted(const SymTensor<S>& K) { return TwistedTensor(std::vector<SymTensor<S>>{K}); }

  int n() const { return slots_[0].n(); }
  int degree() const { return slots_[0].degree(); }
  int rank() const { return r_; }
  bool is_void() const { return degree() < 0; }

  const SymTensor<S>& slot(int e) const { return slots_[static_cast<std::size_t>(e)]; }
  SymTensor<S>& slot(int e) { return slots_[static_cast<std::size_t>(e)]; }
  const std::vector<SymTensor<S>>& slots() const { return slots_; }

  bool is_zero() const {
    for (const auto& s : slots_) {
      if (!s.is_zero()) return false;
    }
    return true;
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& s : slots_) m = std::max(m, s.max_abs());
    return m;
  }
  bool is_trace_free() const {
    for (const auto& s : slots_) {
      if (!lambda_op(s).is_zero()) return false;
    }
    return true;
  }

  TwistedTensor& operator+=(const TwistedTensor& o) {
    check_same(o);
    for (std::size_t e = 0; e < slots_.size(); ++e) slots_[e] += o.slots_[e];
    return *this;
  }
  TwistedTensor& operator-=(const TwistedTensor& o) {
    check_same(o);
    for (std::size_t e = 0; e < slots_.size(); ++e) slots_[e] -= o.slots_[e];
    return *this;
  }
  TwistedTensor& operator*=(const S& s) {
    for (auto& t : slots_) t *= s;
    return *this;
  }
  TwistedTensor& add_scaled(const S& s, const TwistedTensor& o) {
    check_same(o);
    for (std::size_t e = 0; e < slots_.size(); ++e) slots_[e].add_scaled(s, o.slots_[e]);
    return *this;
  }
  friend TwistedTensor operator+(TwistedTensor a, const TwistedTensor& b) { return a += b; }
  friend TwistedTensor operator-(TwistedTensor a, const TwistedTensor& b) { return a -= b; }
  friend TwistedTensor operator*(const S& s, TwistedTensor a) { return a *= s; }
  friend TwistedTensor operator-(TwistedTensor a) {
    for (auto& t : a.slots_) t = -t;
    return a;
  }
  friend bool operator==(const TwistedTensor& a, const TwistedTensor& b) { return a.slots_ == b.slots_; }

 private:
  void check_same(const TwistedTensor& o) const {
    require_dims(r_ == o.r_, "TwistedTensor: fiber rank mismatch");
  }

  int r_;
  std::vector<SymTensor<S>> slots_;
};

/// Apply a linear map of the Sym factor slot by slot.
template <Scalar S, class F>
TwistedTensor<S> map_slots(const TwistedTensor<S>& T, F&& f) {
  std::vector<SymTensor<S>> out;
  out.reserve(static_cast<std::size_t>(T.rank()));
  for (const auto& s : T.slots()) out.push_back(f(s));
  return TwistedTensor<S>(std::move(out));
}

/// (id (x) M) T
template <Scalar S>
TwistedTensor<S> apply_e(const EMatrix<S>& M, const TwistedTensor<S>& T) {
  require_dims(M.r == T.rank(), "apply_e: rank mismatch");
  TwistedTensor<S> out(T.n(), T.degree(), T.rank());
  for (int a = 0; a < M.r; ++a) {
    for (int b = 0; b < M.r; ++b) {
      if (!is_zero(M(a, b))) out.slot(a).add_scaled(M(a, b), T.slot(b));
    }
  }
  return out;
}

template <Scalar S>
S inner(const TwistedTensor<S>& A, const TwistedTensor<S>& B) {
  require_dims(A.rank() == B.rank(), "inner: fiber rank mismatch");
  S acc = scalar<S>(0);
  for (int e = 0; e < A.rank(); ++e) acc += inner(A.slot(e), B.slot(e));
  return acc;
}

template <Scalar S>
TwistedTensor<S> frame_mul(int i, const TwistedTensor<S>& T) {
  return map_slots(T, [i](const SymTensor<S>& s) { return frame_mul(i, s); });
}
template <Scalar S>
TwistedTensor<S> frame_contract(int i, const TwistedTensor<S>& T) {
  return map_slots(T, [i](const SymTensor<S>& s) { return frame_contract(i, s); });
}
template <Scalar S>
TwistedTensor<S> frame_mul0(int i, const TwistedTensor<S>& T) {
  return map_slots(T, [i](const SymTensor<S>& s) { return frame_mul0(i, s); });
}
template <Scalar S>
TwistedTensor<S> lambda_op(const TwistedTensor<S>& T) {
  return map_slots(T, [](const SymTensor<S>& s) { return lambda_op(s); });
}
template <Scalar S>
TwistedTensor<S> l_op(const TwistedTensor<S>& T) {
  return map_slots(T, [](const SymTensor<S>& s) { return l_op(s); });
}
template <Scalar S>
TwistedTensor<S> trace_free_part(const TwistedTensor<S>& T) {
  return map_slots(T, [](const SymTensor<S>& s) { return trace_free_part(s); });
}

/// Element of T (x) Sym^k T (x) E; component i is the coefficient of e_i in the T factor.
template <Scalar S>
class VectorTwistedTensor {
 public:
  VectorTwistedTensor() = default;
  VectorTwistedTensor(int n, int k, int r)
      : comps_(static_cast<std::size_t>(n), TwistedTensor<S>(n, k, r)) {}
  explicit VectorTwistedTensor(std::vector<TwistedTensor<S>> comps) : comps_(std::move(comps)) {
    require_dims(!comps_.empty(), "VectorTwistedTensor needs n components");
    require_dims(static_cast<int>(comps_.size()) == comps_[0].n(), "VectorTwistedTensor: need exactly n components");
    for (const auto& c : comps_) {
      require_dims(c.n() == n() && c.degree() == degree() && c.rank() == rank(), "VectorTwistedTensor: component shape");
    }
  }
  /// b (x) V for a frame vector b = e_i.
  static VectorTwistedTensor frame_tensor(int i, const TwistedTensor<S>& V) {
    VectorTwistedTensor out(V.n(), V.degree(), V.rank());
    out.comp(i) = V;
    return out;
  }

  int n() const { return comps_[0].n(); }
  int degree() const { return comps_[0].degree(); }
  int rank() const { return comps_[0].rank(); }
  const TwistedTensor<S>& comp(int i) const { return comps_[static_cast<std::size_t>(i)]; }
  TwistedTensor<S>& comp(int i) { return comps_[static_cast<std::size_t>(i)]; }
  const std::vector<TwistedTensor<S>>& comps() const { return comps_; }

  bool is_zero() const {
    for (const auto& c : comps_) {
      if (!c.is_zero()) return false;
    }
    return true;
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& c : comps_) m = std::max(m, c.max_abs());
    return m;
  }
  bool is_trace_free() const {
    for (const auto& c : comps_) {
      if (!c.is_trace_free()) return false;
    }
    return true;
  }

  VectorTwistedTensor& operator+=(const VectorTwistedTensor& o) {
    require_dims(o.comps_.size() == comps_.size(), "VectorTwistedTensor: n mismatch");
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
    return *this;
  }
  VectorTwistedTensor& operator-=(const VectorTwistedTensor& o) {
    require_dims(o.comps_.size() == comps_.size(), "VectorTwistedTensor: n mismatch");
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
    return *this;
  }
  VectorTwistedTensor& operator*=(const S& s) {
    for (auto& c : comps_) c *= s;
    return *this;
  }
  VectorTwistedTensor& add_scaled(const S& s, const VectorTwistedTensor& o) {
    require_dims(o.comps_.size() == comps_.size(), "VectorTwistedTensor: n mismatch");
    for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i].add_scaled(s, o.comps_[i]);
    return *this;
  }
  friend VectorTwistedTensor operator+(VectorTwistedTensor a, const VectorTwistedTensor& b) { return a += b; }
  friend VectorTwistedTensor operator-(VectorTwistedTensor a, const VectorTwistedTensor& b) { return a -= b; }
  friend VectorTwistedTensor operator*(const S& s, VectorTwistedTensor a) { return a *= s; }
  friend bool operator==(const VectorTwistedTensor& a, const VectorTwistedTensor& b) { return a.comps_ == b.comps_; }

 private:
  std::vector<TwistedTensor<S>> comps_;
};

template <Scalar S>
S inner(const VectorTwistedTensor<S>& A, const VectorTwistedTensor<S>& B) {
  require_dims(A.n() == B.n(), "inner: n mismatch");
  S acc = scalar<S>(0);
  for (int i = 0; i < A.n(); ++i) acc += inner(A.comp(i), B.comp(i));
  return acc;
}

template <Scalar T>
TwistedTensor<T> convert(const TwistedTensor<Rational>& X) {
  std::vector<SymTensor<T>> slots;
  for (const auto& s : X.slots()) slots.push_back(convert<T>(s));
  return TwistedTensor<T>(std::move(slots));
}

}  // namespace symfiber
