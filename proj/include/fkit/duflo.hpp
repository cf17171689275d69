#pragma once

#include <map>
#include <string>
#include <vector>

#include "fkit/algebra.hpp"
#include "fkit/formality.hpp"
#include "fkit/linalg.hpp"
#include "json.hpp"

namespace fkit {

/// Finite-dimensional Lie algebra over Q with basis x_1..x_r.
class LieAlgebra {
 public:
  LieAlgebra() = default;
  /// `c[(i*r + j)*r + k]` = c^k_{ij}, 0-based. Checks skew symmetry and Jacobi.
  LieAlgebra(int dim, std::vector<Rational> c, std::string name = "");

  static LieAlgebra abelian(int r = 2);
  static LieAlgebra heisenberg();
  /// Basis h, e, f: [h,e] = 2e, [h,f] = -2f, [e,f] = h.
  static LieAlgebra sl2();
  static LieAlgebra so3();
  /// One of abelian, heisenberg, sl2, so3.
  static LieAlgebra named(const std::string& name);

  /// {"dim":r,"c":[[i,j,k,num,den],...]}, 1-based indices, i<j.
  static LieAlgebra from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const Rational& c(int i, int j, int k) const { return c_[(i * dim_ + j) * dim_ + k]; }

 private:
  int dim_ = 0;
  std::vector<Rational> c_;
  std::string name_;
};

/// pi^{ij} = sum_k c^k_{ij} x_k, so that {x_i, x_j} = [x_i, x_j].
QPolyVector kks_bivector(const LieAlgebra& L);

/// Element of U(g) in the PBW basis: non-decreasing words of 0-based generators.
using PbwWord = std::vector<std::uint8_t>;

class UEAElement {
 public:
  UEAElement() = default;
  static UEAElement word(const PbwWord& w, const Rational& c = 1);

  const std::map<PbwWord, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  void add(const PbwWord& w, const Rational& c);

  UEAElement& operator+=(const UEAElement& o);
  UEAElement& operator-=(const UEAElement& o);
  friend UEAElement operator+(UEAElement a, const UEAElement& b) { return a += b; }
  friend UEAElement operator-(UEAElement a, const UEAElement& b) { return a -= b; }
  friend UEAElement operator*(const Rational& s, const UEAElement& a);
  friend bool operator==(const UEAElement&, const UEAElement&) = default;

  /// "x1^2*x3 - 1/2*x2", PBW order.
  std::string to_string() const;

 private:
  std::map<PbwWord, Rational> terms_;
};

/// Multiplication in U(g) by normal ordering with memoized rewriting.
class UEA {
 public:
  explicit UEA(const LieAlgebra& L) : L_(L) {}

  const LieAlgebra& algebra() const { return L_; }
  UEAElement generator(int i) const;
  /// Normal form of an arbitrary word.
  UEAElement normal_order(const PbwWord& w) const;
  UEAElement product(const UEAElement& a, const UEAElement& b) const;
  UEAElement commutator(const UEAElement& a, const UEAElement& b) const;
  /// Number of PBW words of degree <= k.
  std::size_t basis_size(int k) const;
  std::vector<PbwWord> basis(int k) const;

 private:
  LieAlgebra L_;
  mutable std::map<PbwWord, UEAElement> memo_;
};

/// x_{i1}...x_{ik} -> (1/k!) sum over orderings, normal-ordered.
UEAElement sym(const UEA& U, const QPoly& p);

struct DufloTruncation {
  int max_degree = 0;
  /// Polynomials in the dual coordinates xi_1..xi_r.
  QPoly log_J, J, J_half;
};

/// Coefficients b_k of log(sinh(t/2)/(t/2)) = sum b_k t^k, k <= degree.
std::vector<Rational> log_sinhc_series(int degree);

DufloTruncation duflo_J(const LieAlgebra& L, int max_degree);

/// sym(J^{1/2} . p): each xi-monomial of J^{1/2} acts as the matching
/// constant-coefficient derivative. Throws when deg p exceeds the truncation.
UEAElement duflo_map(const UEA& U, const DufloTruncation& J, const QPoly& p);

/// Basis of the homogeneous invariants of S(g) in the given degree.
std::vector<QPoly> invariants(const LieAlgebra& L, int degree);

/// The subspace [U,U] within U of filtration degree <= k, for exact membership.
class CommutatorSpace {
 public:
  CommutatorSpace(const UEA& U, int k);
  bool contains(const UEAElement& u) const;
  int rank() const { return span_.rank(); }
  int ambient() const { return span_.ambient(); }

 private:
  std::vector<Rational> coords(const UEAElement& u) const;

  std::map<PbwWord, int> index_;
  RationalSpan span_{0};
};

struct DufloReport {
  std::string algebra;
  int degree = 0;
  bool j_half_squared = false;
  int invariant_count = 0;
  int algebra_checks = 0, algebra_failures = 0;
  int central_checks = 0, central_failures = 0;
  int module_checks = 0, module_failures = 0;
  std::string counterexample;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Exact checks of the Duflo theorem up to `degree`: multiplicativity on
/// invariants, centrality of their images, and D(pq) - D(p)D(q) in [U,U]
/// for invariant p and every monomial q.
DufloReport duflo_theorem_check(const LieAlgebra& L, int degree);

struct MorphismReport {
  std::vector<double> defect;
  std::vector<double> error;
  double tolerance = 0;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// x_i*x_j - x_j*x_i - [x_i,x_j] per hbar-order for a star product built from
/// pi = (1/2) kks_bivector(L), hbar = 1.
MorphismReport morphism_I_check(const LieAlgebra& L, const StarProduct& S, double tolerance);

}  // namespace fkit
