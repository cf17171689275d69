#pragma once

#include <gmpxx.h>

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

namespace fkit {

using Rational = mpq_class;

/// A floating value carrying a linear error bound. Used wherever Monte-Carlo
/// weights enter an otherwise exact computation.
struct Approx {
  double value = 0.0;
  double error = 0.0;

  Approx() = default;
  Approx(double v, double e = 0.0) : value(v), error(e) {}
  explicit Approx(const Rational& q) : value(q.get_d()), error(0.0) {}

  Approx& operator+=(const Approx& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
  Approx& operator-=(const Approx& o) {
    value -= o.value;
    error += o.error;
    return *this;
  }
  Approx& operator*=(const Approx& o) {
    double e = std::abs(value) * o.error + std::abs(o.value) * error + error * o.error;
    value *= o.value;
    error = e;
    return *this;
  }
  Approx operator-() const { return {-value, error}; }

  friend Approx operator+(Approx a, const Approx& b) { return a += b; }
  friend Approx operator-(Approx a, const Approx& b) { return a -= b; }
  friend Approx operator*(Approx a, const Approx& b) { return a *= b; }
  friend bool operator==(const Approx& a, const Approx& b) {
    return a.value == b.value && a.error == b.error;
  }
  friend std::ostream& operator<<(std::ostream& os, const Approx& a) {
    os << a.value;
    if (a.error != 0.0) os << "(+-" << a.error << ")";
    return os;
  }
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static bool is_zero(const Rational& s) { return sgn(s) == 0; }
  static Rational from_rational(const Rational& q) { return q; }
  static Rational from_int(long v) { return Rational(v); }
  static double magnitude(const Rational& s) { return std::abs(s.get_d()); }
  static double error(const Rational&) { return 0.0; }
  static bool is_negative(const Rational& s) { return sgn(s) < 0; }
  static std::string to_string(const Rational& s) { return s.get_str(); }
};

template <>
struct ScalarTraits<Approx> {
  static bool is_zero(const Approx& s) { return s.value == 0.0 && s.error == 0.0; }
  static Approx from_rational(const Rational& q) { return Approx(q); }
  static Approx from_int(long v) { return Approx(static_cast<double>(v)); }
  static double magnitude(const Approx& s) { return std::abs(s.value); }
  static double error(const Approx& s) { return s.error; }
  static bool is_negative(const Approx& s) { return s.value < 0; }
  static std::string to_string(const Approx& s) {
    std::ostringstream os;
    os.precision(12);
    os << s.value;
    return os.str();
  }
};

template <>
struct ScalarTraits<double> {
  static bool is_zero(double s) { return s == 0.0; }
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double from_int(long v) { return static_cast<double>(v); }
  static double magnitude(double s) { return std::abs(s); }
  static double error(double) { return 0.0; }
  static bool is_negative(double s) { return s < 0; }
  static std::string to_string(double s) {
    std::ostringstream os;
    os.precision(12);
    os << s;
    return os.str();
  }
};

/// Converts between scalar fields. Rational -> Approx is exact (error 0);
/// the reverse direction is not provided.
template <class To, class From>
To scalar_cast(const From& s) {
  if constexpr (std::is_same_v<To, From>) {
    return s;
  } else if constexpr (std::is_same_v<From, Rational>) {
    return ScalarTraits<To>::from_rational(s);
  } else if constexpr (std::is_same_v<To, Approx> && std::is_same_v<From, double>) {
    return Approx(s);
  } else {
    static_assert(sizeof(To) == 0, "unsupported scalar conversion");
  }
}

}  // namespace fkit
