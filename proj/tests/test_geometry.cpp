#include <cmath>
#include <random>

#include "doctest.h"
#include "fkit/errors.hpp"
#include "fkit/geometry.hpp"

using namespace fkit;
using doctest::Approx;

namespace {

const Complex I(0, 1);

Complex random_upper(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> re(-2, 2), im(0.2, 2);
  return {re(rng), im(rng)};
}

// central differences of angle(p,q) in the four real coordinates
AngleGradient fd_gradient(Complex p, Complex q, double h = 1e-6) {
  AngleGradient g;
  for (int k = 0; k < 2; ++k) {
    Complex e = k == 0 ? Complex(h, 0) : Complex(0, h);
    g.dp[k] = (angle(p + e, q) - angle(p - e, q)) / (2 * h);
    g.dq[k] = (angle(p, q + e) - angle(p, q - e)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("angle values") {
  CHECK(angle(Complex(0.3, 0), Complex(1, 2)) == Approx(0.0));
  CHECK(angle(Complex(-2, 0), Complex(5, 0.1)) == Approx(0.0));
  CHECK(angle(I, 2.0 * I) == Approx(0.0));
  CHECK(angle(I, 1.0 + I) == Approx(-std::atan2(2.0, 1.0)));
}

TEST_CASE("angle gradient against finite differences") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    Complex p = random_upper(rng), q = random_upper(rng);
    if (std::abs(p - q) < 0.3) continue;
    auto g = angle_gradient(p, q);
    auto f = fd_gradient(p, q);
    for (int k = 0; k < 2; ++k) {
      CHECK(g.dp[k] == Approx(f.dp[k]).epsilon(1e-6).scale(1));
      CHECK(g.dq[k] == Approx(f.dq[k]).epsilon(1e-6).scale(1));
    }
    Vec2 dir{0.6, -0.8};
    CHECK(dangle(p, q, Endpoint::Source, dir) == Approx(g.dp[0] * 0.6 - g.dp[1] * 0.8));
    CHECK(dangle(p, q, Endpoint::Target, dir) == Approx(g.dq[0] * 0.6 - g.dq[1] * 0.8));
  }
  // p on the real axis: the angle is constant
  auto g = angle_gradient(Complex(0.4, 0), Complex(1, 1));
  CHECK(g.dq[0] == Approx(0.0));
  CHECK(g.dq[1] == Approx(0.0));
}

TEST_CASE("disk angle form") {
  std::mt19937_64 rng(11);
  CHECK(phi_D(I, Complex(0.5, 0), 2.0 + I) == Approx(0.0));
  for (int t = 0; t < 20; ++t) {
    Complex p = random_upper(rng), q = random_upper(rng), r = random_upper(rng);
    if (std::abs(p - q) < 0.3 || std::abs(q - r) < 0.3 || std::abs(p - r) < 0.3) continue;
    auto g = omega_D(p, q, r);
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
      Complex e = k == 0 ? Complex(h, 0) : Complex(0, h);
      CHECK(g.dp[k] == Approx((phi_D(p + e, q, r) - phi_D(p - e, q, r)) / (2 * h)).epsilon(1e-6));
      CHECK(g.dq[k] == Approx((phi_D(p, q + e, r) - phi_D(p, q - e, r)) / (2 * h)).epsilon(1e-6));
      CHECK(g.dr[k] == Approx((phi_D(p, q, r + e) - phi_D(p, q, r - e)) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("mobius map") {
  CHECK(std::abs(mobius_psi(I)) < 1e-15);
  CHECK(std::abs(mobius_psi(0.0) - Complex(-1, 0)) < 1e-15);
  Complex z(2, 3);
  CHECK(std::abs(mobius_psi_inv(mobius_psi(z)) - z) < 1e-12);
  CHECK(std::abs(mobius_psi(Complex(0.7, 0))) == Approx(1.0));
  CHECK_THROWS_AS(mobius_psi_inv(1.0), DegenerateConfiguration);
}

TEST_CASE("shoikhet edge forms") {
  using V = VertexRef;
  CHECK(shoikhet_zero_edge({V::first(1), V::special()}));
  CHECK(shoikhet_zero_edge({V::special(), V::second(1)}));
  CHECK(!shoikhet_zero_edge({V::special(), V::second(2)}));
  CHECK(!shoikhet_zero_edge({V::first(1), V::second(1)}));

  // Special -> b2 against the angle at i transported through psi^{-1}
  AdmissibleGraph g(0, 2, true, {{V::second(2)}});
  Edge e{V::special(), V::second(2)};
  for (double theta : {0.4, 1.9, 3.5, 5.2}) {
    DiskConfig cfg{{}, {1.0, std::polar(1.0, theta)}};
    DiskTangent dir{{}, {0.0, 1.0}};
    const double h = 1e-6;
    double fd = (angle(I, mobius_psi_inv(std::polar(1.0, theta + h))) -
                 angle(I, mobius_psi_inv(std::polar(1.0, theta - h)))) /
                (2 * h);
    CHECK(shoikhet_edge_form(g, e, cfg, dir) == Approx(fd).epsilon(1e-8));
  }

  DiskConfig bad{{Complex(1.2, 0)}, {1.0}};
  CHECK_THROWS_AS(bad.check(), ValidationError);
}

TEST_CASE("gauge charts") {
  CHECK(gauge_chart(Space::C, 2, 0).dim == 2);
  CHECK(gauge_chart(Space::D, 1, 1).dim == 2);
  auto c03 = gauge_chart(Space::C, 0, 3);
  CHECK(c03.dim == 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  for (int t = 0; t < 100; ++t) {
    auto emb = embed(c03, {unit(rng)});
    double q1 = emb.position(VertexRef::second(1)).real();
    double q2 = emb.position(VertexRef::second(2)).real();
    double q3 = emb.position(VertexRef::second(3)).real();
    CHECK(q1 < q2);
    CHECK(q2 < q3);
  }
  auto c20 = gauge_chart(Space::C, 2, 0);
  for (int t = 0; t < 100; ++t) {
    auto emb = embed(c20, {unit(rng), unit(rng)});
    CHECK(std::abs(emb.pos[0] - emb.pos[1]) > 0.0);
  }
}

TEST_CASE("embedding derivatives") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  for (auto [space, n, m] : {std::tuple{Space::C, 2, 2}, std::tuple{Space::D, 2, 1}, std::tuple{Space::D, 1, 3}}) {
    auto chart = gauge_chart(space, n, m);
    std::vector<double> u(chart.dim);
    for (auto& x : u) x = unit(rng);
    auto emb = embed(chart, u);
    const double h = 1e-6;
    for (int k = 0; k < chart.dim; ++k) {
      auto up = u, dn = u;
      up[k] += h;
      dn[k] -= h;
      auto ep = embed(chart, up), ed = embed(chart, dn);
      for (std::size_t s = 0; s < emb.pos.size(); ++s) {
        if (emb.at_infinity[s]) continue;
        Complex fd = (ep.pos[s] - ed.pos[s]) / (2 * h);
        CHECK(std::abs(emb.deriv[s * chart.dim + k] - fd) < 1e-5 * (1 + std::abs(fd)));
      }
    }
  }
}

TEST_CASE("wedge edge rows against finite-difference angles") {
  using V = VertexRef;
  AdmissibleGraph wedge(1, 2, false, {{V::second(1), V::second(2)}});
  auto chart = gauge_chart(Space::C, 1, 2);
  auto angles = [&](const std::vector<double>& u) {
    auto emb = embed(chart, u);
    Complex p = emb.position(V::first(1));
    return std::array<double, 2>{angle(p, emb.position(V::second(1))), angle(p, emb.position(V::second(2)))};
  };
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> u{unit(rng), unit(rng)};
    auto emb = embed(chart, u);
    auto edges = wedge.edges();
    double r0[2], r1[2];
    REQUIRE(edge_form_row(wedge, edges[0], emb, r0));
    REQUIRE(edge_form_row(wedge, edges[1], emb, r1));
    const double h = 1e-6;
    double fd[2][2];
    for (int k = 0; k < 2; ++k) {
      auto up = u, dn = u;
      up[k] += h;
      dn[k] -= h;
      auto a = angles(up), c = angles(dn);
      fd[0][k] = (a[0] - c[0]) / (2 * h);
      fd[1][k] = (a[1] - c[1]) / (2 * h);
    }
    double det = r0[0] * r1[1] - r0[1] * r1[0];
    double det_fd = fd[0][0] * fd[1][1] - fd[0][1] * fd[1][0];
    CHECK(det == Approx(det_fd).epsilon(1e-5));
  }
}

TEST_CASE("angle lemma probes") {
  for (unsigned seed : {1u, 2u, 3u})
    for (const auto& p : lemma_probes(1e-4, seed)) {
      INFO(p.name);
      CHECK(p.residual < 1e-3);
    }
}
