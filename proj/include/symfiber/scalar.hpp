#pragma once

// Scalar modes. Every value type in the library is a template over one of the
// two scalar types below; the mode is fixed for a whole computation.

#include <gmpxx.h>

#include <cmath>
#include <cstdio>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "symfiber/errors.hpp"

namespace symfiber {

using Rational = mpq_class;

enum class ScalarMode { rational, floating };

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr ScalarMode mode = ScalarMode::rational;
  static constexpr std::string_view name = "rational";

  static Rational from_int(long v) { return Rational(v); }
  static Rational from_ratio(long p, long q) {
    Rational r(p, q);
    r.canonicalize();
    return r;
  }
  static Rational from_rational(const Rational& q) { return q; }
  static bool is_zero(const Rational& x) { return sgn(x) == 0; }
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational abs(const Rational& x) { return ::abs(x); }
  static std::string to_string(const Rational& x) { return x.get_str(); }

  // Accepts "p", "-p", "p/q".
  static Rational parse(std::string_view text) {
    Rational r;
    if (r.set_str(std::string(text), 10) != 0) {
      throw SchemaError("invalid rational literal '" + std::string(text) + "'");
    }
    if (r.get_den() == 0) throw SchemaError("zero denominator in '" + std::string(text) + "'");
    r.canonicalize();
    return r;
  }
};

template <>
struct ScalarTraits<double> {
  static constexpr ScalarMode mode = ScalarMode::floating;
  static constexpr std::string_view name = "float";

  static double from_int(long v) { return static_cast<double>(v); }
  static double from_ratio(long p, long q) { return static_cast<double>(p) / static_cast<double>(q); }
  static double from_rational(const Rational& q) { return q.get_d(); }
  static bool is_zero(double x) { return x == 0.0; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
  static std::string to_string(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
  static double parse(std::string_view text) {
    // Rationals written as "p/q" are accepted in float mode too.
    const Rational q = ScalarTraits<Rational>::parse(text);
    return q.get_d();
  }
};

template <class S>
concept Scalar = requires { ScalarTraits<S>::mode; };

template <Scalar S>
S scalar(long v) {
  return ScalarTraits<S>::from_int(v);
}

template <Scalar S>
S scalar(long p, long q) {
  return ScalarTraits<S>::from_ratio(p, q);
}

template <Scalar S>
bool is_zero(const S& x) {
  return ScalarTraits<S>::is_zero(x);
}

template <Scalar S>
double to_double(const S& x) {
  return ScalarTraits<S>::to_double(x);
}

template <Scalar S>
double abs_double(const S& x) {
  return std::fabs(ScalarTraits<S>::to_double(x));
}

inline std::string_view mode_name(ScalarMode m) {
  return m == ScalarMode::rational ? "rational" : "float";
}

inline ScalarMode parse_mode(std::string_view s) {
  if (s == "rational") return ScalarMode::rational;
  if (s == "float") return ScalarMode::floating;
  throw UsageError("unknown scalar mode '" + std::string(s) + "' (expected rational|float)");
}

}  // namespace symfiber
