#pragma once

// Seeded generators. Coefficients are small integers so rational mode stays
// cheap; unit vectors come from inverse stereographic projection so they are
// exactly rational.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

#include "symfiber/twisted.hpp"

namespace symfiber {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mix a list of integers into one seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin() { return uniform_int(0, 1) == 1; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline constexpr int kCoeffRange = 3;

template <Scalar S>
S random_scalar(Rng& rng) {
  return scalar<S>(rng.uniform_int(-kCoeffRange, kCoeffRange));
}

template <Scalar S>
Vec<S> random_vector(int n, Rng& rng) {
  Vec<S> v;
  for (int i = 0; i < n; ++i) v.push_back(random_scalar<S>(rng));
  return v;
}

/// Unit vector with rational entries: (2u, |u|^2 - 1) / (|u|^2 + 1), coordinates shuffled.
template <Scalar S>
Vec<S> random_unit_vector(int n, Rng& rng) {
  std::vector<long> u;
  long q = 0;
  for (int i = 0; i + 1 < n; ++i) {
    u.push_back(rng.uniform_int(-4, 4));
    q += u.back() * u.back();
  }
  const long d = q + 1;
  Vec<S> v;
  for (long ui : u) v.push_back(scalar<S>(2 * ui, d));
  v.push_back(scalar<S>(q - 1, d));
  std::shuffle(v.begin(), v.end(), rng.engine());
  return v;
}

template <Scalar S>
SymTensor<S> random_sym(int n, int k, Rng& rng) {
  SymTensor<S> K(n, k);
  for (std::size_t a = 0; a < K.size(); ++a) K[a] = random_scalar<S>(rng);
  return K;
}

/// Random element of Sym^k_0: trace-free part of a random tensor.
template <Scalar S>
SymTensor<S> random_trace_free(int n, int k, Rng& rng) {
  return trace_free_part(random_sym<S>(n, k, rng));
}

template <Scalar S>
TwistedTensor<S> random_twisted(int n, int k, int r, Rng& rng, bool trace_free = true) {
  std::vector<SymTensor<S>> slots;
  for (int e = 0; e < r; ++e) slots.push_back(trace_free ? random_trace_free<S>(n, k, rng) : random_sym<S>(n, k, rng));
  return TwistedTensor<S>(std::move(slots));
}

template <Scalar S>
VectorTwistedTensor<S> random_vector_twisted(int n, int k, int r, Rng& rng, bool trace_free = true) {
  std::vector<TwistedTensor<S>> comps;
  for (int i = 0; i < n; ++i) comps.push_back(random_twisted<S>(n, k, r, rng, trace_free));
  return VectorTwistedTensor<S>(std::move(comps));
}

}  // namespace symfiber
