#pragma once

// Multi-indices and the per-(n, k) monomial basis tables shared by every
// tensor of that shape.

#include <array>
#include <atomic>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symfiber/errors.hpp"

namespace symfiber {

/// Exponent vector alpha of the monomial e_1^{alpha_1} ... e_n^{alpha_n}.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> alpha) : alpha_(std::move(alpha)) {
    for (int a : alpha_) {
      if (a < 0) throw DimensionError("multi-index entries must be nonnegative");
    }
  }
  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)); }
  static MultiIndex unit(int n, int i) {
    MultiIndex m = zero(n);
    m.alpha_.at(static_cast<std::size_t>(i)) = 1;
    return m;
  }

  int size() const { return static_cast<int>(alpha_.size()); }
  int degree() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0); }
  int operator[](int i) const { return alpha_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& entries() const { return alpha_; }

  MultiIndex operator+(const MultiIndex& other) const {
    require_dims(size() == other.size(), "multi-index length mismatch");
    MultiIndex out = *this;
    for (std::size_t i = 0; i < alpha_.size(); ++i) out.alpha_[i] += other.alpha_[i];
    return out;
  }

  /// Graded order: lower degree first, then lexicographically larger exponent first
  /// (so e_1^k leads its degree).
  std::strong_ordering operator<=>(const MultiIndex& other) const {
    if (auto c = degree() <=> other.degree(); c != 0) return c;
    if (auto c = size() <=> other.size(); c != 0) return c;
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      if (alpha_[i] != other.alpha_[i]) return other.alpha_[i] <=> alpha_[i];
    }
    return std::strong_ordering::equal;
  }
  bool operator==(const MultiIndex&) const = default;

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < alpha_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(alpha_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<int> alpha_;
};

inline std::uint64_t binomial(int top, int bottom) {
  if (bottom < 0 || top < 0 || bottom > top) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= bottom; ++i) {
    r = r * static_cast<std::uint64_t>(top - bottom + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

/// Number of degree-k monomials in n variables, C(n+k-1, k). Zero for k < 0.
inline std::size_t monomial_count(int n, int k) {
  if (k < 0 || n <= 0) return k == 0 && n == 0 ? 1 : 0;
  return static_cast<std::size_t>(binomial(n + k - 1, k));
}

/// Dimension of the trace-free part Sym^k_0 R^n.
inline std::size_t trace_free_dim(int n, int k) {
  if (k < 0) return 0;
  return monomial_count(n, k) - monomial_count(n, k - 2);
}

/// Enumeration of degree-k monomials in n variables plus the shift tables used
/// by multiplication and contraction with frame vectors. Instances are
/// immutable and shared; obtain them through MonomialBasis::get.
class MonomialBasis {
 public:
  static constexpr int kMaxDegreeForWeights = 20;

  static const MonomialBasis& get(int n, int k);

  int n() const { return n_; }
  int degree() const { return k_; }
  std::size_t size() const { return monomials_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return monomials_[i]; }
  const std::vector<MultiIndex>& monomials() const { return monomials_; }

  /// Position of alpha in this basis.
  std::size_t rank(const MultiIndex& alpha) const {
    require_dims(alpha.size() == n_ && alpha.degree() == k_,
                 "multi-index " + alpha.str() + " does not belong to basis (n=" + std::to_string(n_) +
                     ", k=" + std::to_string(k_) + ")");
    return rank_of(alpha.entries());
  }

  /// raise(i)[a] = index of alpha_a + delta_i in basis(n, k+1).
  std::span<const std::uint32_t> raise(int i) const { return raise_[static_cast<std::size_t>(i)]; }
  /// lower(i)[a] = index of alpha_a - delta_i in basis(n, k-1), or kNone when alpha_i = 0.
  std::span<const std::uint32_t> lower(int i) const { return lower_[static_cast<std::size_t>(i)]; }
  /// alpha_i for every monomial, stored per i.
  std::span<const std::uint32_t> exponent(int i) const { return exponent_[static_cast<std::size_t>(i)]; }
  /// alpha! = prod_i alpha_i!.
  std::span<const std::uint64_t> factorial_weight() const { return weight_; }

  static constexpr std::uint32_t kNone = 0xffffffffu;

 private:
  MonomialBasis(int n, int k);

  static std::size_t lex_rank(int n, int k, const std::vector<int>& a) {
    std::size_t r = 0;
    int remaining = k;
    for (int i = 0; i + 1 < n; ++i) {
      const int ai = a[static_cast<std::size_t>(i)];
      for (int c = ai + 1; c <= remaining; ++c) r += monomial_count(n - i - 1, remaining - c);
      remaining -= ai;
    }
    return r;
  }
  std::size_t rank_of(const std::vector<int>& a) const { return lex_rank(n_, k_, a); }

  void enumerate(std::vector<int>& cur, int pos, int remaining) {
    if (pos == n_ - 1) {
      cur[static_cast<std::size_t>(pos)] = remaining;
      monomials_.emplace_back(cur);
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      cur[static_cast<std::size_t>(pos)] = c;
      enumerate(cur, pos + 1, remaining - c);
    }
  }

  int n_;
  int k_;
  std::vector<MultiIndex> monomials_;
  std::vector<std::vector<std::uint32_t>> raise_;
  std::vector<std::vector<std::uint32_t>> lower_;
  std::vector<std::vector<std::uint32_t>> exponent_;
  std::vector<std::uint64_t> weight_;
};

inline MonomialBasis::MonomialBasis(int n, int k) : n_(n), k_(k) {
  if (k >= 0 && n > 0) {
    std::vector<int> cur(static_cast<std::size_t>(n), 0);
    monomials_.reserve(monomial_count(n, k));
    enumerate(cur, 0, k);
  } else if (k == 0 && n == 0) {
    monomials_.emplace_back(std::vector<int>{});
  }
  const std::size_t count = monomials_.size();
  raise_.assign(static_cast<std::size_t>(n), std::vector<std::uint32_t>(count));
  lower_.assign(static_cast<std::size_t>(n), std::vector<std::uint32_t>(count, kNone));
  exponent_.assign(static_cast<std::size_t>(n), std::vector<std::uint32_t>(count));
  weight_.assign(count, 1);
  for (std::size_t a = 0; a < count; ++a) {
    std::vector<int> e = monomials_[a].entries();
    std::uint64_t w = 1;
    for (int i = 0; i < n; ++i) {
      const int ei = e[static_cast<std::size_t>(i)];
      exponent_[static_cast<std::size_t>(i)][a] = static_cast<std::uint32_t>(ei);
      if (k <= kMaxDegreeForWeights) {
        for (int f = 2; f <= ei; ++f) w *= static_cast<std::uint64_t>(f);
      }
    }
    weight_[a] = w;
    for (int i = 0; i < n; ++i) {
      e[static_cast<std::size_t>(i)] += 1;
      raise_[static_cast<std::size_t>(i)][a] = static_cast<std::uint32_t>(lex_rank(n, k + 1, e));
      e[static_cast<std::size_t>(i)] -= 2;
      if (e[static_cast<std::size_t>(i)] >= 0) {
        lower_[static_cast<std::size_t>(i)][a] = static_cast<std::uint32_t>(lex_rank(n, k - 1, e));
      }
      e[static_cast<std::size_t>(i)] += 1;
    }
  }
}

namespace detail {

struct BasisCache {
  static constexpr int kMaxN = 24;
  static constexpr int kMaxK = 48;
  std::array<std::array<std::atomic<const MonomialBasis*>, kMaxK + 2>, kMaxN + 1> fast{};
  std::mutex mutex;
  std::map<std::pair<int, int>, std::unique_ptr<MonomialBasis>> owned;
};

inline BasisCache& basis_cache() {
  static BasisCache cache;
  return cache;
}

}  // namespace detail

inline const MonomialBasis& MonomialBasis::get(int n, int k) {
  require_dims(n >= 0, "dimension must be nonnegative");
  const int kk = k < 0 ? -1 : k;
  auto& cache = detail::basis_cache();
  const bool fast = n <= detail::BasisCache::kMaxN && kk <= detail::BasisCache::kMaxK;
  if (fast) {
    if (const MonomialBasis* b = cache.fast[static_cast<std::size_t>(n)][static_cast<std::size_t>(kk + 1)].load(
            std::memory_order_acquire)) {
      return *b;
    }
  }
  std::lock_guard lock(cache.mutex);
  auto& slot = cache.owned[{n, kk}];
  if (!slot) slot.reset(new MonomialBasis(n, kk));
  if (fast) {
    cache.fast[static_cast<std::size_t>(n)][static_cast<std::size_t>(kk + 1)].store(slot.get(),
                                                                                   std::memory_order_release);
  }
  return *slot;
}

}  // namespace symfiber
