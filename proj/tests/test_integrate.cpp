#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "fkit/errors.hpp"
#include "fkit/integrate.hpp"

using namespace fkit;
using doctest::Approx;

namespace {

VertexRef v(int k) { return VertexRef::first(k); }
VertexRef b(int k) { return VertexRef::second(k); }
VertexRef o() { return VertexRef::special(); }

constexpr double kPi = std::numbers::pi;

// Adaptive GSL quadrature of a std::function over an interval; infinite
// endpoints are handled by the qagi family.
class Quad {
 public:
  Quad() : ws_(gsl_integration_workspace_alloc(2000)) { gsl_set_error_handler_off(); }
  ~Quad() { gsl_integration_workspace_free(ws_); }
  Quad(const Quad&) = delete;
  Quad& operator=(const Quad&) = delete;

  double operator()(const std::function<double(double)>& f, double a, double b) {
    gsl_function F;
    F.function = [](double x, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(x); };
    F.params = const_cast<std::function<double(double)>*>(&f);
    double r = 0, err = 0;
    const double abs_tol = 1e-10, rel_tol = 1e-8;
    if (std::isinf(a) && std::isinf(b))
      gsl_integration_qagi(&F, abs_tol, rel_tol, 2000, ws_, &r, &err);
    else if (std::isinf(b))
      gsl_integration_qagiu(&F, a, abs_tol, rel_tol, 2000, ws_, &r, &err);
    else if (std::isinf(a))
      gsl_integration_qagil(&F, b, abs_tol, rel_tol, 2000, ws_, &r, &err);
    else
      gsl_integration_qags(&F, a, b, abs_tol, rel_tol, 2000, ws_, &r, &err);
    return r;
  }

 private:
  gsl_integration_workspace* ws_;
};

constexpr double kInf = INFINITY;

// Wedge: p = x+iy with boundary points 0 and 1; d phi(p,0) ^ d phi(p,1)
// = 4y / (|p|^2 |p-1|^2) dx dy.
double wedge_oracle() {
  Quad outer, inner;
  auto fx = [&](double x) {
    return inner([&](double y) { return 4 * y / ((x * x + y * y) * ((1 - x) * (1 - x) + y * y)); }, 0, kInf);
  };
  double total = outer(fx, -kInf, 0) + outer(fx, 0, 1) + outer(fx, 1, kInf);
  return total / (4 * kPi * kPi);
}

// Fan (1,m) with p pinned at i and ordered boundary points: each edge
// contributes d phi(i, t) = 2 dt / (1 + t^2).
double fan_oracle(int m) {
  std::vector<Quad> q(m);
  auto rho = [](double t) { return 2.0 / (1.0 + t * t); };
  std::function<double(int, double)> level = [&](int k, double lo) -> double {
    if (k == m) return 1.0;
    return q[k]([&](double t) { return rho(t) * level(k + 1, t); }, lo, kInf);
  };
  double total = q[0]([&](double t) { return rho(t) * level(1, t); }, -kInf, kInf);
  return total / std::pow(2 * kPi, m);
}

// Shoikhet graphs with Special -> b2, ..., b_m on the half-plane picture:
// Special at i, b1 at infinity, so the chart reduces to ordered boundary points.
double shoikhet_fan_oracle(int m) { return fan_oracle(m - 1); }

QmcOptions opts(std::int64_t samples, std::uint64_t seed = 1) {
  QmcOptions q;
  q.samples = samples;
  q.seed = seed;
  q.batch = 1 << 13;
  return q;
}

bool within(const WeightEstimate& w, double target, double k = 3.0) {
  return std::abs(w.value - target) <= std::max(k * w.std_error, 1e-9);
}

}  // namespace

TEST_CASE("quadrature oracles") {
  CHECK(wedge_oracle() == Approx(0.5).epsilon(1e-6));
  CHECK(fan_oracle(3) == Approx(1.0 / 6).epsilon(1e-6));
}

TEST_CASE("wedge weight") {
  AdmissibleGraph wedge(1, 2, false, {{b(1), b(2)}});
  auto w = kontsevich_weight(wedge, opts(1 << 18));
  CHECK(!w.exact);
  CHECK(std::abs(w.value - 0.5) <= 0.01);
  CHECK(within(w, wedge_oracle()));
}

TEST_CASE("fan weights") {
  for (int m = 1; m <= 3; ++m) {
    std::vector<VertexRef> star;
    for (int k = 1; k <= m; ++k) star.push_back(b(k));
    auto w = kontsevich_weight(AdmissibleGraph(1, m, false, {star}), opts(1 << 17));
    INFO("m = " << m);
    CHECK(within(w, fan_oracle(m)));
  }
}

TEST_CASE("shoikhet fans") {
  auto w2 = shoikhet_weight(AdmissibleGraph(0, 2, true, {{b(2)}}), opts(1 << 14));
  CHECK(within(w2, shoikhet_fan_oracle(2)));
  auto w3 = shoikhet_weight(AdmissibleGraph(0, 3, true, {{b(2), b(3)}}), opts(1 << 17));
  CHECK(within(w3, shoikhet_fan_oracle(3)));
}

TEST_CASE("exact zeros") {
  auto three = kontsevich_weight(AdmissibleGraph(2, 2, false, {{b(1), b(2)}, {b(1)}}), opts(1 << 10));
  CHECK(three.exact);
  CHECK(three.value == 0.0);
  CHECK(three.samples == 0);

  auto zero_edge = shoikhet_weight(AdmissibleGraph(0, 2, true, {{b(1)}}), opts(1 << 10));
  CHECK(zero_edge.exact);
  CHECK(zero_edge.value == 0.0);

  auto wheel = shoikhet_weight(AdmissibleGraph(1, 1, true, {{o(), b(1)}, {}}), opts(1 << 10));
  CHECK(wheel.exact);
  CHECK(wheel.value == 0.0);

  // zero-dimensional space: a single boundary point and nothing else
  auto point = shoikhet_weight(AdmissibleGraph(0, 1, true, {{}}), opts(1 << 10));
  CHECK(point.exact);
  CHECK(point.value == 1.0);
}

TEST_CASE("edge from Special into First(1)") {
  auto w = shoikhet_weight(AdmissibleGraph(1, 1, true, {{b(1)}, {v(1)}}), opts(1 << 16));
  CHECK(within(w, 0.0));
}

TEST_CASE("integrand antisymmetry") {
  AdmissibleGraph g(2, 2, false, {{b(1), v(2)}, {b(2), b(1)}});
  auto chart = gauge_chart(Space::C, 2, 2);
  std::vector<double> u{0.3, 0.6, 0.2, 0.8};
  double a = integrand(g, chart, u);
  CHECK(a != 0.0);
  CHECK(integrand(permute_edges(g, {1, 0, 2, 3}), chart, u) == Approx(-a));
  CHECK(integrand(permute_edges(g, {0, 1, 3, 2}), chart, u) == Approx(-a));
  // a repeated row
  GraphOptions ordered;
  ordered.ordered_pair_edges = true;
  AdmissibleGraph twice(2, 2, false, {{v(2), b(1)}, {v(1), b(2)}});
  CHECK(validate(twice, ordered).empty());
  AdmissibleGraph rep(2, 2, false, {{b(1), b(2)}, {b(1), b(1)}});
  CHECK(integrand(rep, chart, u) == 0.0);
}

TEST_CASE("determinism") {
  AdmissibleGraph g(2, 1, true, {{v(2), b(1)}, {v(1), b(1)}, {}});
  auto a = shoikhet_weight(g, opts(1 << 14, 5));
  auto c = shoikhet_weight(g, opts(1 << 14, 5));
  CHECK(a.value == c.value);
  CHECK(a.std_error == c.std_error);
  CHECK(to_json_line(graph_key(g), a) == to_json_line(graph_key(g), c));
  auto d = shoikhet_weight(g, opts(1 << 14, 6));
  CHECK(std::abs(a.value - d.value) <= 4 * std::hypot(a.std_error, d.std_error) + 1e-12);
}

TEST_CASE("budget") { CHECK_THROWS_AS(kontsevich_weight(AdmissibleGraph(1, 2, false, {{b(1), b(2)}}), opts(0)), CapacityError); }

TEST_CASE("weight cache") {
  auto path = std::filesystem::temp_directory_path() / "fkit_test_cache.jsonl";
  std::filesystem::remove(path);
  AdmissibleGraph wedge(1, 2, false, {{b(1), b(2)}});
  {
    WeightCache cache(path.string());
    CHECK(!cache.get(graph_key(wedge)));
    auto w = kontsevich_weight(wedge, opts(1 << 12), &cache);
    auto got = cache.get(graph_key(wedge));
    REQUIRE(got);
    CHECK(got->value == w.value);
    cache.flush();
  }
  {
    WeightCache again(path.string());
    auto got = again.get(graph_key(wedge));
    REQUIRE(got);
    CHECK(got->samples == (1 << 12));
    // more samples replace fewer
    WeightEstimate better{0.5, 1e-4, 1 << 14, 1, false, 0};
    CHECK(again.put(graph_key(wedge), better));
    WeightEstimate worse{0.4, 1e-2, 1 << 10, 1, false, 0};
    CHECK(!again.put(graph_key(wedge), worse));
    CHECK(again.get(graph_key(wedge))->value == 0.5);
  }
  {
    std::ofstream f(path, std::ios::app);
    f << "{not json\n";
  }
  try {
    WeightCache broken(path.string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("stratum at the origin") {
  // First(1) isolated next to Special: identity with the collapsed graph
  AdmissibleGraph g(3, 1, true, {{}, {b(1)}, {v(2), b(1)}, {v(2)}});
  auto q = opts(1 << 15);
  auto ws = stratum_weight_origin(g, q);
  auto w0 = shoikhet_weight(origin_collapse(g), q);
  CHECK(std::abs(ws.value - w0.value) <= 3 * std::hypot(ws.std_error, w0.std_error) + 1e-9);
  CHECK(pointwise_collapse_check(g, {0.3, 0.6, 0.4, 0.7}, 1e-4) < 1e-3);
}
