#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkit/scalar.hpp"

namespace fkit {

inline constexpr int kMaxVars = 8;

/// Exponent vector. Doubles as a derivative multi-index.
struct Monomial {
  std::array<std::uint8_t, kMaxVars> e{};

  int degree() const {
    int s = 0;
    for (auto v : e) s += v;
    return s;
  }
  bool is_one() const { return degree() == 0; }
  std::uint8_t operator[](int i) const { return e[i]; }
  std::uint8_t& operator[](int i) { return e[i]; }

  static Monomial unit(int i) {
    Monomial m;
    m.e[i] = 1;
    return m;
  }
  friend Monomial operator+(Monomial a, const Monomial& b) {
    for (int i = 0; i < kMaxVars; ++i) a.e[i] = static_cast<std::uint8_t>(a.e[i] + b.e[i]);
    return a;
  }
  /// True when every exponent of b is <= the corresponding exponent of a.
  bool divisible_by(const Monomial& b) const {
    for (int i = 0; i < kMaxVars; ++i)
      if (e[i] < b.e[i]) return false;
    return true;
  }
  friend bool operator<(const Monomial& a, const Monomial& b) { return a.e < b.e; }
  friend bool operator==(const Monomial& a, const Monomial& b) { return a.e == b.e; }
  friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }
};

using MultiIndex = Monomial;

/// Product of factorials of the entries.
inline Rational multi_factorial(const Monomial& m) {
  Rational r = 1;
  for (int i = 0; i < kMaxVars; ++i)
    for (int k = 2; k <= m.e[i]; ++k) r *= k;
  return r;
}

/// All monomials in `dim` variables of total degree <= `degree`, graded.
inline std::vector<Monomial> monomials_up_to(int dim, int degree) {
  std::vector<Monomial> out;
  for (int deg = 0; deg <= degree; ++deg) {
    Monomial m;
    auto rec = [&](auto&& self, int i, int left) -> void {
      if (i == dim - 1 || dim == 0) {
        if (dim == 0) {
          if (left == 0) out.push_back(m);
          return;
        }
        m.e[i] = static_cast<std::uint8_t>(left);
        out.push_back(m);
        m.e[i] = 0;
        return;
      }
      for (int k = left; k >= 0; --k) {
        m.e[i] = static_cast<std::uint8_t>(k);
        self(self, i + 1, left - k);
      }
      m.e[i] = 0;
    };
    rec(rec, 0, deg);
  }
  return out;
}

/// Sparse multivariate polynomial over a scalar field S. Variables are
/// x1..x_dim (0-based internally). No zero coefficients are stored.
template <class S>
class Poly {
 public:
  using Scalar = S;
  using Traits = ScalarTraits<S>;

  Poly() = default;
  explicit Poly(int dim) : dim_(dim) {
    if (dim < 0 || dim > kMaxVars) throw std::invalid_argument("Poly: dimension out of range");
  }

  static Poly constant(int dim, const S& c) {
    Poly p(dim);
    p.add_term(Monomial{}, c);
    return p;
  }
  static Poly variable(int dim, int i) {
    if (i < 0 || i >= dim) throw std::invalid_argument("Poly::variable: index out of range");
    Poly p(dim);
    p.add_term(Monomial::unit(i), Traits::from_int(1));
    return p;
  }
  static Poly monomial(int dim, const Monomial& m, const S& c) {
    Poly p(dim);
    p.add_term(m, c);
    return p;
  }

  int dim() const { return dim_; }
  const std::map<Monomial, S>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  S coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Traits::from_int(0) : it->second;
  }

  void add_term(const Monomial& m, const S& c) {
    if (Traits::is_zero(c)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (Traits::is_zero(it->second)) terms_.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    adopt_dim(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Poly& operator*=(const S& s) {
    if (Traits::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (Traits::is_zero(it->second))
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }
  Poly operator-() const {
    Poly r(*this);
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const S& s) { return a *= s; }
  friend Poly operator*(const S& s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r(std::max(a.dim_, b.dim_));
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma + mb, ca * cb);
    return r;
  }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  /// Partial derivative d/dx_i.
  Poly derivative(int i) const {
    Poly r(dim_);
    for (const auto& [m, c] : terms_) {
      if (m.e[i] == 0) continue;
      Monomial n = m;
      n.e[i] -= 1;
      r.add_term(n, c * Traits::from_int(m.e[i]));
    }
    return r;
  }

  /// Mixed partial derivative d^alpha.
  Poly derivative(const MultiIndex& alpha) const {
    if (alpha.is_one()) return *this;
    Poly r(dim_);
    for (const auto& [m, c] : terms_) {
      if (!m.divisible_by(alpha)) continue;
      Monomial n = m;
      long factor = 1;
      for (int i = 0; i < kMaxVars; ++i) {
        for (int k = 0; k < alpha.e[i]; ++k) factor *= (m.e[i] - k);
        n.e[i] = static_cast<std::uint8_t>(m.e[i] - alpha.e[i]);
      }
      r.add_term(n, c * Traits::from_int(factor));
    }
    return r;
  }

  /// Largest coefficient magnitude (the residual norm used in reports).
  double max_abs() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, Traits::magnitude(c));
    return m;
  }
  /// Largest propagated error bound among coefficients.
  double max_error() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, Traits::error(c));
    return m;
  }

  template <class T>
  Poly<T> cast() const {
    Poly<T> r(dim_);
    for (const auto& [m, c] : terms_) r.add_term(m, scalar_cast<T>(c));
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      bool neg = Traits::is_negative(c);
      S mag = neg ? S(-c) : c;
      std::string cs = Traits::to_string(mag);
      if (first)
        out += neg ? "-" : "";
      else
        out += neg ? " - " : " + ";
      first = false;
      std::string ms;
      for (int i = 0; i < kMaxVars; ++i) {
        if (m.e[i] == 0) continue;
        if (!ms.empty()) ms += "*";
        ms += "x" + std::to_string(i + 1);
        if (m.e[i] > 1) ms += "^" + std::to_string(m.e[i]);
      }
      if (ms.empty())
        out += cs;
      else if (cs == "1")
        out += ms;
      else
        out += cs + "*" + ms;
    }
    return out;
  }

 private:
  void adopt_dim(const Poly& o) { dim_ = std::max(dim_, o.dim_); }

  int dim_ = 0;
  std::map<Monomial, S> terms_;
};

using QPoly = Poly<Rational>;
using APoly = Poly<Approx>;

/// Parses the text grammar `3/2*x1^2*x2 - x3` into an exact polynomial.
/// Variables x1..x_dim; dim = 0 infers the dimension from the largest index.
QPoly parse_poly(const std::string& text, int dim = 0);

}  // namespace fkit
