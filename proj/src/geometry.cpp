#include "fkit/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fkit/errors.hpp"

namespace fkit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCoincide = 1e-12;
const Complex kI{0.0, 1.0};

// Gradient of arg(z) in the real coordinates of z.
Vec2 darg(Complex z) {
  double r2 = std::norm(z);
  return {-z.imag() / r2, z.real() / r2};
}

void require_distinct(Complex p, Complex q) {
  if (std::abs(q - p) < 1e-14) throw DegenerateConfiguration("coincident points");
}

double dot(Vec2 g, Complex d) { return g[0] * d.real() + g[1] * d.imag(); }

}  // namespace

double angle(Complex p, Complex q) {
  require_distinct(p, q);
  return std::arg((q - p) / (q - std::conj(p)));
}

AngleGradient angle_gradient(Complex p, Complex q) {
  require_distinct(p, q);
  Vec2 g1 = darg(q - p);
  Vec2 g2 = darg(q - std::conj(p));
  AngleGradient out;
  out.dq = {g1[0] - g2[0], g1[1] - g2[1]};
  out.dp = {-g1[0] + g2[0], -g1[1] - g2[1]};
  return out;
}

double dangle(Complex p, Complex q, Endpoint which, Vec2 direction) {
  auto g = angle_gradient(p, q);
  const Vec2& v = which == Endpoint::Source ? g.dp : g.dq;
  return v[0] * direction[0] + v[1] * direction[1];
}

double phi_D(Complex p, Complex q, Complex r) {
  require_distinct(p, r);
  return angle(q, r) - angle(q, p);
}

AngleGradientD omega_D(Complex p, Complex q, Complex r) {
  require_distinct(p, r);
  auto a = angle_gradient(q, r);
  auto b = angle_gradient(q, p);
  AngleGradientD out;
  out.dq = {a.dp[0] - b.dp[0], a.dp[1] - b.dp[1]};
  out.dr = a.dq;
  out.dp = {-b.dq[0], -b.dq[1]};
  return out;
}

Complex mobius_psi(Complex z) {
  if (std::abs(z + kI) < 1e-15) throw DegenerateConfiguration("psi: pole at -i");
  return (z - kI) / (z + kI);
}

Complex mobius_psi_inv(Complex w) {
  if (std::abs(1.0 - w) < 1e-15) throw DegenerateConfiguration("psi inverse: pole at 1");
  return kI * (1.0 + w) / (1.0 - w);
}

void DiskConfig::check() const {
  for (std::size_t i = 0; i < interior.size(); ++i) {
    double r = std::abs(interior[i]);
    if (!(r > 0.0 && r < 1.0))
      throw ValidationError("interior point outside the punctured disk");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(interior[i] - interior[j]) < kCoincide)
        throw ValidationError("interior points coincide");
  }
  if (boundary.empty()) throw ValidationError("disk configuration needs a boundary point");
  if (boundary[0] != Complex(1.0, 0.0)) throw ValidationError("boundary[0] must be 1");
  double prev = 0.0;
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    if (std::abs(std::abs(boundary[k]) - 1.0) > 1e-12)
      throw ValidationError("boundary point off the unit circle");
    if (k == 0) continue;
    double th = std::arg(boundary[k]);
    if (th <= 0) th += 2 * kPi;
    if (!(th > prev)) throw ValidationError("boundary points not cyclically ordered");
    prev = th;
  }
}

bool shoikhet_zero_edge(const Edge& e) {
  if (e.target.is_special()) return true;
  if (e.source.is_second()) return true;
  if (e.source.is_special() && e.target == VertexRef::second(1)) return true;
  return false;
}

int Embedding::slot(const VertexRef& v) const {
  switch (v.kind) {
    case VertexRef::Kind::First:
      return v.index - 1;
    case VertexRef::Kind::Second:
      return n + v.index - 1;
    case VertexRef::Kind::Special:
      if (!special) throw ValidationError("embedding has no special vertex");
      return n + m;
  }
  return -1;
}

bool edge_form_row(const AdmissibleGraph& g, const Edge& e, const Embedding& emb, double* row) {
  const int dim = emb.dim;
  // Adds sign * d angle(P, Q) where a slot of -1 stands for the fixed point i.
  auto add = [&](int sp, Complex p, int sq, Complex q, double sign) {
    auto gr = angle_gradient(p, q);
    for (int k = 0; k < dim; ++k) {
      double v = 0.0;
      if (sp >= 0) v += dot(gr.dp, emb.deriv[sp * dim + k]);
      if (sq >= 0) v += dot(gr.dq, emb.deriv[sq * dim + k]);
      row[k] += sign * v;
    }
  };
  if (!g.has_special()) {
    if (!e.source.is_first()) throw ValidationError("edge must start at a first-type vertex");
    for (int k = 0; k < dim; ++k) row[k] = 0.0;
    int s = emb.slot(e.source);
    int t = emb.slot(e.target);
    add(s, emb.pos[s], t, emb.pos[t], 1.0);
    return true;
  }
  if (shoikhet_zero_edge(e)) return false;
  for (int k = 0; k < dim; ++k) row[k] = 0.0;
  int t = emb.slot(e.target);
  if (e.source.is_special()) {
    add(-1, kI, t, emb.pos[t], 1.0);
    return true;
  }
  int s = emb.slot(e.source);
  if (e.target == VertexRef::second(1)) {
    add(s, emb.pos[s], -1, kI, 1.0);
    return true;
  }
  add(s, emb.pos[s], t, emb.pos[t], 1.0);
  add(s, emb.pos[s], -1, kI, -1.0);
  return true;
}

namespace {

Embedding transport(const AdmissibleGraph& g, const DiskConfig& cfg, const DiskTangent& dir) {
  cfg.check();
  if (static_cast<int>(cfg.interior.size()) != g.n() ||
      static_cast<int>(cfg.boundary.size()) != g.m())
    throw ValidationError("disk configuration does not match the graph type");
  if (dir.interior.size() != cfg.interior.size() || dir.boundary.size() != cfg.boundary.size())
    throw ValidationError("tangent does not match the configuration");
  Embedding emb;
  emb.dim = 1;
  emb.n = g.n();
  emb.m = g.m();
  emb.special = true;
  for (std::size_t k = 0; k < cfg.interior.size(); ++k) {
    Complex z = cfg.interior[k];
    emb.pos.push_back(mobius_psi_inv(z));
    emb.deriv.push_back(2.0 * kI / ((1.0 - z) * (1.0 - z)) * dir.interior[k]);
    emb.at_infinity.push_back(0);
  }
  for (std::size_t k = 0; k < cfg.boundary.size(); ++k) {
    if (k == 0) {
      emb.pos.emplace_back(std::numeric_limits<double>::infinity(), 0.0);
      emb.deriv.emplace_back(0.0, 0.0);
      emb.at_infinity.push_back(1);
      continue;
    }
    double th = std::arg(cfg.boundary[k]);
    if (th <= 0) th += 2 * kPi;
    double s = std::sin(th / 2);
    emb.pos.emplace_back(-std::cos(th / 2) / s, 0.0);
    emb.deriv.emplace_back(dir.boundary[k] / (2 * s * s), 0.0);
    emb.at_infinity.push_back(0);
  }
  emb.pos.push_back(kI);
  emb.deriv.emplace_back(0.0, 0.0);
  emb.at_infinity.push_back(0);
  return emb;
}

}  // namespace

double shoikhet_edge_form(const AdmissibleGraph& g, const Edge& e, const DiskConfig& cfg,
                          const DiskTangent& direction) {
  if (!g.has_special()) throw ValidationError("shoikhet_edge_form needs a graph with vertex 0");
  if (!g.contains(e.source) || !g.contains(e.target))
    throw ValidationError("edge does not belong to the graph");
  auto emb = transport(g, cfg, direction);
  double v = 0.0;
  if (!edge_form_row(g, e, emb, &v)) return 0.0;
  return v;
}

namespace {

int chart_dim(Space space, int n, int m) {
  return space == Space::C ? 2 * n + m - 2 : 2 * n + m - 1;
}

// Everything derived from one chart point.
struct ChartPoint {
  Embedding emb;
  std::vector<double> ambient;  // canonical coordinates of the full space
  std::vector<double> frame;    // ambient x dim, row-major
  std::vector<Complex> disk;    // all points in the disk picture
  DiskConfig disk_config;
};

struct DiskPoint {
  Complex z;
  Complex dz_du1, dz_du2;
};

// r^2 = 1 - (1-u1)^2: the density grows like (1-r^2)^{-1/2} at the circle, so the
// 1/|p-q| singularity at a boundary point has finite variance.
DiskPoint disk_point(double u1, double u2) {
  double s = 1.0 - u1;
  double r = std::sqrt(u1 * (2.0 - u1));
  Complex e = std::polar(1.0, 2 * kPi * u2);
  return {r * e, e * (s / r), 2 * kPi * kI * r * e};
}

// Smoothstep on boundary gaps: oversamples neighbouring boundary points
// with density ~ t^{-1/2} at both ends.
std::pair<double, double> gap_warp(double u) { return {u * u * (3 - 2 * u), 6 * u * (1 - u)}; }

void check_coords(const GaugeChart& chart, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != chart.dim)
    throw ValidationError("chart coordinate count mismatch");
  for (double x : u)
    if (!(x > 0.0 && x < 1.0)) throw ValidationError("chart coordinate outside (0,1)");
}

ChartPoint chart_point(const GaugeChart& chart, const std::vector<double>& u) {
  check_coords(chart, u);
  const int n = chart.n, m = chart.m, dim = chart.dim;
  const int amb = 2 * n + m;
  ChartPoint cp;
  Embedding& emb = cp.emb;
  emb.dim = dim;
  emb.n = n;
  emb.m = m;
  emb.special = chart.space == Space::D;
  int slots = n + m + (emb.special ? 1 : 0);
  emb.pos.assign(slots, Complex{});
  emb.deriv.assign(static_cast<std::size_t>(slots * dim), Complex{});
  emb.at_infinity.assign(slots, 0);
  cp.ambient.assign(amb, 0.0);
  cp.frame.assign(static_cast<std::size_t>(amb * dim), 0.0);
  auto set_frame = [&](int row, int k, double v) { cp.frame[row * dim + k] = v; };

  // Interior point from two cube coordinates through the disk; writes ambient
  // rows for the chosen picture.
  auto interior = [&](int vertex, int k0, bool ambient_is_disk) {
    DiskPoint d = disk_point(u[k0], u[k0 + 1]);
    Complex w = mobius_psi_inv(d.z);
    Complex dw = 2.0 * kI / ((1.0 - d.z) * (1.0 - d.z));
    emb.pos[vertex] = w;
    emb.deriv[vertex * dim + k0] = dw * d.dz_du1;
    emb.deriv[vertex * dim + k0 + 1] = dw * d.dz_du2;
    Complex a = ambient_is_disk ? d.z : w;
    Complex a1 = ambient_is_disk ? d.dz_du1 : dw * d.dz_du1;
    Complex a2 = ambient_is_disk ? d.dz_du2 : dw * d.dz_du2;
    cp.ambient[2 * vertex] = a.real();
    cp.ambient[2 * vertex + 1] = a.imag();
    set_frame(2 * vertex, k0, a1.real());
    set_frame(2 * vertex + 1, k0, a1.imag());
    set_frame(2 * vertex, k0 + 1, a2.real());
    set_frame(2 * vertex + 1, k0 + 1, a2.imag());
    cp.disk.push_back(d.z);
  };

  if (chart.space == Space::C) {
    int k = 0;
    int first_free = 0;
    if (m == 1 && n >= 1) {
      Complex p = std::polar(1.0, kPi * u[0]);
      Complex dp = kPi * kI * p;
      emb.pos[0] = p;
      emb.deriv[0 * dim + 0] = dp;
      cp.ambient[0] = p.real();
      cp.ambient[1] = p.imag();
      set_frame(0, 0, dp.real());
      set_frame(1, 0, dp.imag());
      cp.disk.push_back(mobius_psi(p));
      k = 1;
      first_free = 1;
    } else if (m == 0) {
      emb.pos[0] = kI;
      cp.ambient[1] = 1.0;
      cp.disk.push_back(0.0);
      first_free = 1;
    }
    for (int v = first_free; v < n; ++v, k += 2) interior(v, k, false);
    // Boundary points: q1 = 0, q2 = 1, then cumulative gaps.
    std::vector<double> dq(static_cast<std::size_t>(dim), 0.0);
    double q = 0.0;
    for (int j = 0; j < m; ++j) {
      int slot = n + j;
      if (j == 1) {
        q = 1.0;
      } else if (j >= 2) {
        auto [t, dt] = gap_warp(u[k]);
        q += t / (1 - t);
        dq[k] = dt / ((1 - t) * (1 - t));
        ++k;
      }
      emb.pos[slot] = q;
      for (int c = 0; c < dim; ++c) {
        emb.deriv[slot * dim + c] = dq[c];
        set_frame(2 * n + j, c, dq[c]);
      }
      cp.ambient[2 * n + j] = q;
      cp.disk.push_back(mobius_psi(q));
    }
  } else {
    int k = 0;
    for (int v = 0; v < n; ++v, k += 2) interior(v, k, true);
    cp.disk_config.interior = cp.disk;
    cp.disk.push_back(0.0);  // the special vertex
    std::vector<double> dth(static_cast<std::size_t>(dim), 0.0);
    double th = 0.0;
    for (int j = 0; j < m; ++j) {
      int slot = n + j;
      if (j == 0) {
        emb.pos[slot] = Complex(std::numeric_limits<double>::infinity(), 0.0);
        emb.at_infinity[slot] = 1;
      } else {
        auto [t, dt] = gap_warp(u[k]);
        double rest = 2 * kPi - th;
        for (int c = 0; c < dim; ++c) dth[c] *= (1 - t);
        dth[k] = rest * dt;
        th += rest * t;
        ++k;
        double s = std::sin(th / 2);
        emb.pos[slot] = -std::cos(th / 2) / s;
        for (int c = 0; c < dim; ++c) emb.deriv[slot * dim + c] = dth[c] / (2 * s * s);
      }
      for (int c = 0; c < dim; ++c) set_frame(2 * n + j, c, dth[c]);
      cp.ambient[2 * n + j] = th;
      Complex b = j == 0 ? Complex(1.0, 0.0) : std::polar(1.0, th);
      cp.disk.push_back(b);
      cp.disk_config.boundary.push_back(b);
    }
    emb.pos[n + m] = kI;
  }
  for (std::size_t a = 0; a < cp.disk.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (std::abs(cp.disk[a] - cp.disk[b]) < kCoincide)
        throw DegenerateConfiguration("chart point with coincident configuration points");
  return cp;
}

double slice_density(const GaugeChart& chart, const ChartPoint& cp) {
  const int n = chart.n, m = chart.m, dim = chart.dim;
  const int amb = 2 * n + m;
  Eigen::MatrixXd mat(amb, amb);
  int lead = chart.space == Space::C ? 2 : 1;
  if (lead + dim != amb) throw ValidationError("chart dimension bookkeeping failed");
  for (int r = 0; r < amb; ++r) {
    bool is_real = r >= 2 * n;
    if (chart.space == Space::C) {
      // translation along the real axis, then the Euler (dilation) field
      mat(r, 0) = is_real ? 1.0 : (r % 2 == 0 ? 1.0 : 0.0);
      mat(r, 1) = cp.ambient[r];
    } else {
      if (is_real) {
        mat(r, 0) = 1.0;
      } else if (r % 2 == 0) {
        mat(r, 0) = -cp.ambient[r + 1];
      } else {
        mat(r, 0) = cp.ambient[r - 1];
      }
    }
    for (int k = 0; k < dim; ++k) mat(r, lead + k) = cp.frame[r * dim + k];
  }
  return mat.determinant();
}

}  // namespace

GaugeChart gauge_chart(Space space, int n, int m) {
  if (n < 0 || m < 0) throw ValidationError("gauge_chart: negative type");
  GaugeChart chart;
  chart.space = space;
  chart.n = n;
  chart.m = m;
  chart.dim = chart_dim(space, n, m);
  if (chart.dim < 0) throw ValidationError("gauge_chart: negative dimension");
  if (space == Space::D && m < 1) throw ValidationError("gauge_chart: D needs m >= 1");
  if (space == Space::C) {
    if (m >= 2)
      chart.descriptor = "q1=0,q2=1";
    else if (m == 1)
      chart.descriptor = "q1=0,|p1|=1";
    else
      chart.descriptor = "p1=i";
  } else {
    chart.descriptor = "b1=1";
  }
  std::vector<double> u(static_cast<std::size_t>(chart.dim));
  for (int k = 0; k < chart.dim; ++k) u[k] = 0.5 + 0.31 * std::sin(1.7 * k + 0.4);
  double det = slice_density(chart, chart_point(chart, u));
  if (det == 0.0) throw DegenerateConfiguration("gauge_chart: singular slice frame");
  chart.orientation = det > 0 ? 1 : -1;
  return chart;
}

Embedding embed(const GaugeChart& chart, const std::vector<double>& u) {
  return chart_point(chart, u).emb;
}

DiskConfig embed_disk(const GaugeChart& chart, const std::vector<double>& u) {
  if (chart.space != Space::D) throw ValidationError("embed_disk needs a D chart");
  return chart_point(chart, u).disk_config;
}

double jacobian(const GaugeChart& chart, const std::vector<double>& u) {
  return slice_density(chart, chart_point(chart, u));
}

namespace {

Vec2 scale(Vec2 v, double s) { return {v[0] * s, v[1] * s}; }
Vec2 diff(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec2 sum(Vec2 a, Vec2 b) { return {a[0] + b[0], a[1] + b[1]}; }
Vec2 neg(Vec2 a) { return {-a[0], -a[1]}; }
double gap(Vec2 a, Vec2 b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

}  // namespace

std::vector<LemmaProbe> lemma_probes(double eps, unsigned seed, int points) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(-1.5, 1.5), im(0.4, 2.0), ph(0.0, 2 * kPi);
  auto hpt = [&] { return Complex(re(rng), im(rng)); };
  auto unit = [&] { return std::polar(1.0, ph(rng)); };
  // spectator points stay at unit scale from the collapsing cluster
  auto away = [&](Complex z) {
    Complex w = hpt();
    while (std::abs(w - z) < 1.0) w = hpt();
    return w;
  };
  const Vec2 zero{0.0, 0.0};

  std::vector<LemmaProbe> out;
  auto run = [&](const std::string& name, auto&& probe) {
    double worst = 0.0;
    for (int k = 0; k < points; ++k) worst = std::max(worst, probe());
    out.push_back({name, eps, worst});
  };

  run("omega.i", [&] {
    Complex z0 = hpt(), w = unit();
    auto g = angle_gradient(z0 - eps * w / 2.0, z0 + eps * w / 2.0);
    double r = gap(sum(g.dp, g.dq), zero);
    return std::max(r, gap(scale(diff(g.dq, g.dp), eps / 2), darg(w)));
  });
  run("omega.ii", [&] {
    Complex p(re(rng), eps), q = away(p);
    auto g = angle_gradient(p, q);
    return std::max(gap(g.dq, zero), std::abs(g.dp[0]));
  });
  run("omega_D.i", [&] {
    Complex q(re(rng), eps), p = away(q), r = away(q);
    auto g = omega_D(p, q, r);
    return std::max({gap(g.dp, zero), gap(g.dr, zero), std::abs(g.dq[0])});
  });
  run("omega_D.ii", [&] {
    double x0 = re(rng);
    Complex a = hpt(), b = away(a), r = away(x0);
    auto g = omega_D(x0 + eps * a, x0 + eps * b, r);
    auto lim = angle_gradient(b, a);
    return std::max({std::abs(g.dp[0] + g.dq[0]), gap(g.dr, zero),
                     gap(scale(g.dp, eps), neg(lim.dq)), gap(scale(g.dq, eps), neg(lim.dp))});
  });
  run("omega_D.iv.real", [&] {
    double x0 = re(rng);
    Complex a = hpt(), c = away(a), q = away(x0);
    auto g = omega_D(x0 + eps * a, q, x0 + eps * c);
    return std::max({std::abs(g.dp[0] + g.dr[0]), gap(scale(g.dp, eps), zero),
                     gap(scale(g.dr, eps), zero), gap(g.dq, zero)});
  });
  run("omega_D.iv.interior", [&] {
    Complex z0 = hpt(), a = unit(), c = unit(), q = away(z0);
    auto g = omega_D(z0 + eps * a, q, z0 + eps * c);
    return std::max({gap(sum(g.dp, g.dr), zero), gap(scale(g.dp, eps), zero),
                     gap(scale(g.dr, eps), zero), gap(g.dq, zero)});
  });
  run("omega_D.v", [&] {
    double x0 = re(rng);
    Complex b = hpt(), c = away(b), p = away(x0);
    auto g = omega_D(p, x0 + eps * b, x0 + eps * c);
    auto lim = angle_gradient(b, c);
    return std::max({std::abs(g.dq[0] + g.dr[0]), gap(g.dp, zero),
                     gap(scale(g.dq, eps), lim.dp), gap(scale(g.dr, eps), lim.dq)});
  });
  run("omega_D.vi", [&] {
    Complex z0 = hpt(), b = unit(), c = -b * Complex(0.5, 0.7), p = away(z0);
    auto g = omega_D(p, z0 + eps * b, z0 + eps * c);
    auto s1 = darg(c - b);
    auto s2 = angle_gradient(z0, p);
    return std::max({gap(sum(g.dq, g.dr), neg(s2.dp)), gap(g.dp, neg(s2.dq)),
                     gap(scale(g.dq, eps), neg(s1)), gap(scale(g.dr, eps), s1)});
  });
  return out;
}

}  // namespace fkit
