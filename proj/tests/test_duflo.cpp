#include "doctest.h"
#include "fkit/duflo.hpp"
#include "fkit/errors.hpp"

using namespace fkit;

namespace {

using Matrix = std::vector<std::vector<QPoly>>;

// ad_xi as a matrix of linear forms: (ad_xi)_{kj} = sum_i xi_i c^k_{ij}
Matrix ad_matrix(const LieAlgebra& L) {
  const int r = L.dim();
  Matrix a(r, std::vector<QPoly>(r, QPoly(r)));
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        if (sgn(L.c(i, j, k)) != 0) a[k][j] += QPoly::variable(r, i) * L.c(i, j, k);
  return a;
}

Matrix mul(const Matrix& a, const Matrix& b) {
  const std::size_t r = a.size();
  Matrix c(r, std::vector<QPoly>(r, QPoly(a[0][0].dim())));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < r; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

QPoly trace_power(const LieAlgebra& L, int t) {
  auto a = ad_matrix(L), p = a;
  for (int s = 1; s < t; ++s) p = mul(p, a);
  QPoly tr(L.dim());
  for (int i = 0; i < L.dim(); ++i) tr += p[i][i];
  return tr;
}

QPoly homogeneous(const QPoly& p, int degree) {
  QPoly out(p.dim());
  for (const auto& [m, c] : p.terms())
    if (m.degree() == degree) out += QPoly::monomial(p.dim(), m, c);
  return out;
}

UEAElement gen(const UEA& U, int i) { return U.generator(i); }

}  // namespace

TEST_CASE("structure constants and bivectors") {
  CHECK(kks_bivector(LieAlgebra::abelian()).is_zero());
  auto h = kks_bivector(LieAlgebra::heisenberg());
  CHECK(h.components().size() == 1);
  CHECK(h.component(0b011) == QPoly::variable(3, 2));

  auto L = LieAlgebra::sl2();
  auto pi = kks_bivector(L);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      QPoly expect(3);
      for (int k = 0; k < 3; ++k)
        if (sgn(L.c(i, j, k)) != 0) expect += QPoly::variable(3, k) * L.c(i, j, k);
      CHECK(pi.full_component({i, j}) == expect);
    }

  CHECK(LieAlgebra::from_json(L.to_json()).to_json() == L.to_json());
  // [x1,x2] = x3, [x1,x3] = x1 is not a Lie algebra
  nlohmann::json bad = {{"dim", 3}, {"c", {{1, 2, 3, 1, 1}, {1, 3, 1, 1, 1}}}};
  CHECK_THROWS_AS(LieAlgebra::from_json(bad), ValidationError);
  CHECK_THROWS_AS(LieAlgebra::named("e8"), ParseError);
}

TEST_CASE("J against matrix traces") {
  auto beta = log_sinhc_series(6);
  CHECK(beta[2] == Rational(1, 24));
  CHECK(beta[4] == Rational(-1, 2880));
  CHECK(beta[6] == Rational(1, 181440));

  for (const char* name : {"sl2", "so3"}) {
    auto L = LieAlgebra::named(name);
    auto J = duflo_J(L, 4);
    CHECK(homogeneous(J.log_J, 2) == trace_power(L, 2) * Rational(1, 24));
    CHECK(homogeneous(J.log_J, 4) == trace_power(L, 4) * Rational(-1, 2880));
    CHECK(homogeneous(J.J_half, 2) == trace_power(L, 2) * Rational(1, 48));
    CHECK(homogeneous(J.J_half * J.J_half, 4) == homogeneous(J.J, 4));
  }
  for (const char* name : {"abelian", "heisenberg"}) {
    auto L = LieAlgebra::named(name);
    CHECK(duflo_J(L, 4).J == QPoly::constant(L.dim(), 1));
    CHECK(trace_power(L, 2).is_zero());
  }
}

TEST_CASE("symmetrization") {
  auto L = LieAlgebra::sl2();
  UEA U(L);
  // x2 x1 = x1 x2 - [x1,x2] = x1 x2 - 2 x2
  CHECK(sym(U, parse_poly("x1*x2", 3)).to_string() == "x1*x2 - x2");
  CHECK(U.normal_order({1, 0}).to_string() == "x1*x2 - 2*x2");
  CHECK(sym(U, parse_poly("3*x2 - 1", 3)) == Rational(3) * gen(U, 1) - UEAElement::word({}));
  CHECK(U.basis_size(4) == 35);
  CHECK(U.basis(2).size() == 10);
}

TEST_CASE("Duflo map on sl2") {
  auto L = LieAlgebra::sl2();
  UEA U(L);
  auto J = duflo_J(L, 4);
  auto C = parse_poly("x1^2 + 4*x2*x3", 3);
  auto dC = duflo_map(U, J, C);
  CHECK(dC.to_string() == "x1^2 + 4*x2*x3 - 2*x1 + 1");
  for (int i = 0; i < 3; ++i) CHECK(U.commutator(dC, gen(U, i)).is_zero());
  CHECK(duflo_map(U, J, C * C) == U.product(dC, dC));
  CHECK(duflo_map(U, J, QPoly::variable(3, 1)) == gen(U, 1));

  CommutatorSpace comm(U, 4);
  auto q = QPoly::variable(3, 0);
  auto diff = duflo_map(U, J, C * q) - U.product(dC, duflo_map(U, J, q));
  CHECK(comm.contains(diff));
  CHECK(!comm.contains(UEAElement::word({})));
  CHECK_THROWS_AS(duflo_map(U, J, C * C * C), ValidationError);
}

TEST_CASE("abelian and Heisenberg") {
  auto A = LieAlgebra::abelian();
  UEA UA(A);
  auto JA = duflo_J(A, 4);
  auto p = parse_poly("x1^2 + x1*x2", 2);
  CHECK(duflo_map(UA, JA, p) == sym(UA, p));
  CHECK(duflo_map(UA, JA, parse_poly("x1^2", 2)).to_string() == "x1^2");
  CHECK(CommutatorSpace(UA, 3).rank() == 0);
  CHECK(invariants(A, 2).size() == 3);

  auto H = LieAlgebra::heisenberg();
  auto inv1 = invariants(H, 1);
  REQUIRE(inv1.size() == 1);
  CHECK(inv1[0] * (Rational(1) / inv1[0].coefficient(Monomial::unit(2))) == QPoly::variable(3, 2));
  bool has_square = false;
  for (const auto& f : invariants(H, 2))
    if (f.terms().size() == 1 && f.terms().begin()->first == Monomial::unit(2) + Monomial::unit(2)) has_square = true;
  CHECK(has_square);
}

TEST_CASE("invariants of sl2") {
  auto inv = invariants(LieAlgebra::sl2(), 2);
  REQUIRE(inv.size() == 1);
  auto C = parse_poly("x1^2 + 4*x2*x3", 3);
  CHECK(inv[0] == C * inv[0].coefficient(Monomial::unit(0) + Monomial::unit(0)));
  CHECK(invariants(LieAlgebra::sl2(), 1).empty());
}

TEST_CASE("Duflo theorem checks") {
  for (const char* name : {"sl2", "so3", "heisenberg", "abelian"}) {
    auto rep = duflo_theorem_check(LieAlgebra::named(name), 4);
    INFO(name << " " << rep.to_json().dump());
    CHECK(rep.pass);
    CHECK(rep.j_half_squared);
  }
}

TEST_CASE("Heisenberg commutator from the star product") {
  auto H = LieAlgebra::heisenberg();
  QmcOptions q;
  q.samples = 1 << 14;
  WeightCache cache;
  QmcWeightProvider provider(q, &cache);
  TruncationPolicy policy;
  policy.order = 2;
  auto cal = calibrate(provider, policy);
  auto s = star_product(Rational(1, 2) * kks_bivector(H), provider, policy, cal);
  auto rep = morphism_I_check(H, s, 5e-2);
  INFO(rep.to_json().dump());
  CHECK(rep.pass);
  CHECK(rep.defect[0] == 0.0);
}
