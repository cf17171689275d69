#include "fkit/formality.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>

namespace fkit {

namespace {

int field_dim(const std::vector<QPolyVector>& fields) {
  int d = 0;
  for (const auto& f : fields) d = std::max(d, f.dim());
  return d;
}

Rational factorial(int n) {
  Rational r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

/// Edge colorings I: E -> [d] with per-vertex bookkeeping.
struct ColoringFrame {
  std::vector<Edge> edges;
  // index of each edge's emitter among stars(), and its slot within the star
  std::vector<int> emitter;
  std::vector<std::vector<int>> star_edges;

  explicit ColoringFrame(const AdmissibleGraph& g) : edges(g.edges()) {
    const auto& stars = g.stars();
    star_edges.resize(stars.size());
    int e = 0;
    for (std::size_t v = 0; v < stars.size(); ++v)
      for (std::size_t s = 0; s < stars[v].size(); ++s, ++e) {
        emitter.push_back(static_cast<int>(v));
        star_edges[v].push_back(e);
      }
  }

  /// Calls f(colors) for every coloring; stops early when f returns false.
  template <class F>
  void for_each(int d, F&& f) const {
    std::size_t k = edges.size();
    if (k > 0 && d == 0) return;
    std::vector<int> col(k, 0);
    while (true) {
      f(col);
      std::size_t i = 0;
      while (i < k && ++col[i] == d) col[i++] = 0;
      if (i == k) return;
    }
  }

  MultiIndex incoming(const VertexRef& v, const std::vector<int>& col) const {
    MultiIndex a;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (edges[e].target == v) a.e[col[e]] += 1;
    return a;
  }
};

void check_fields(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields) {
  if (static_cast<int>(fields.size()) != g.n())
    throw ValidationError("graph has " + std::to_string(g.n()) + " aerial vertices but " +
                          std::to_string(fields.size()) + " fields were given");
  for (int k = 1; k <= g.n(); ++k)
    if (static_cast<int>(g.valence(VertexRef::first(k))) != fields[k - 1].degree())
      throw ValidationError("valence of v" + std::to_string(k) + " does not match the field degree");
}

/// Product of the aerial vertex factors for one coloring; zero if any vanishes.
QPoly aerial_factor(const AdmissibleGraph& g, const ColoringFrame& fr,
                    const std::vector<QPolyVector>& fields, const std::vector<int>& col, int d) {
  QPoly coef = QPoly::constant(d, 1);
  for (int k = 1; k <= g.n(); ++k) {
    std::vector<int> idx;
    for (int e : fr.star_edges[k - 1]) idx.push_back(col[e]);
    QPoly c = fields[k - 1].full_component(idx);
    if (c.is_zero()) return QPoly(d);
    c = c.derivative(fr.incoming(VertexRef::first(k), col));
    if (c.is_zero()) return QPoly(d);
    coef = coef * c;
  }
  return coef;
}

QPoly word_entry(int dim, const Monomial& m) { return QPoly::monomial(dim, m, 1); }

Approx weight_scalar(const WeightEstimate& w) { return Approx(w.value, w.exact ? 0.0 : w.std_error); }

void check_budget(int n, int m, const TruncationPolicy& policy) {
  if (n + m > policy.max_graph_size)
    throw CapacityError("graph size " + std::to_string(n + m) + " exceeds the budget of " +
                        std::to_string(policy.max_graph_size));
}

int max_degree(const AForm& w) {
  int deg = 0;
  for (const auto& [m, p] : w.components()) deg = std::max(deg, p.degree());
  return deg;
}

AForm difference(const AForm& a, const AForm& b) {
  if (a.is_zero()) return Approx(-1.0) * b;
  if (b.is_zero()) return a;
  return a - b;
}

}  // namespace

nlohmann::json to_json(const WeightRecord& r) {
  return {{"graph", r.key},
          {"value", r.weight.value},
          {"std_error", r.weight.std_error},
          {"samples", r.weight.samples},
          {"exact", r.weight.exact}};
}

QDiffOp u_gamma_operator(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields) {
  if (g.has_special()) throw ValidationError("u_gamma expects a graph without the special vertex");
  check_fields(g, fields);
  int d = field_dim(fields);
  ColoringFrame fr(g);
  QDiffOp out(d, g.m());
  fr.for_each(d, [&](const std::vector<int>& col) {
    QPoly coef = aerial_factor(g, fr, fields, col, d);
    if (coef.is_zero()) return;
    Signature sig(g.m());
    for (int j = 1; j <= g.m(); ++j) sig[j - 1] = fr.incoming(VertexRef::second(j), col);
    out.add_term(sig, coef);
  });
  return out;
}

QPoly u_gamma_graph(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields,
                    const std::vector<QPoly>& args) {
  return u_gamma_operator(g, fields).apply(args);
}

QForm s_gamma_graph(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields,
                    const std::vector<QPoly>& chain) {
  if (!g.has_special()) throw ValidationError("s_gamma expects a graph with the special vertex");
  check_fields(g, fields);
  if (static_cast<int>(chain.size()) != g.m())
    throw ValidationError("chain length " + std::to_string(chain.size()) + " does not match m = " +
                          std::to_string(g.m()));
  int d = field_dim(fields);
  for (const auto& a : chain) d = std::max(d, a.dim());
  const int l = static_cast<int>(g.valence(VertexRef::special()));
  if (l > d) throw ValidationError("form degree exceeds the dimension");
  QForm out(d, l);
  ColoringFrame fr(g);
  for (const auto& e : fr.edges)
    if (e.target.is_special()) return out;
  fr.for_each(d, [&](const std::vector<int>& col) {
    QPoly coef = aerial_factor(g, fr, fields, col, d);
    for (int j = 1; j <= g.m() && !coef.is_zero(); ++j)
      coef = coef * chain[j - 1].derivative(fr.incoming(VertexRef::second(j), col));
    if (coef.is_zero()) return;
    std::vector<int> idx;
    for (int e : fr.star_edges[g.n()]) idx.push_back(col[e]);
    out.add_full(idx, coef);
  });
  Rational lf = factorial(l);
  return Rational(1 / lf) * out;
}

QForm s_gamma_graph(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields, const QChain& chain) {
  int d = std::max(field_dim(fields), chain.dim());
  int l = static_cast<int>(g.valence(VertexRef::special()));
  QForm out(d, std::min(l, d));
  for (const auto& [w, c] : chain.terms()) {
    std::vector<QPoly> entries;
    for (const auto& m : w) entries.push_back(word_entry(d, m));
    out += c * s_gamma_graph(g, fields, entries);
  }
  return out;
}

AOp taylor_U(const std::vector<QPolyVector>& fields, WeightProvider& weights, const TruncationPolicy& policy,
             std::vector<WeightRecord>* log) {
  const int n = static_cast<int>(fields.size());
  const int d = field_dim(fields);
  std::vector<int> valences;
  int total = 0;
  for (const auto& f : fields) {
    valences.push_back(f.degree());
    total += f.degree();
  }
  const int m = total - 2 * n + 2;
  if (m < 0) return AOp(d, 0);
  check_budget(n, m, policy);
  auto graphs = enumerate_kontsevich(n, m, valences, policy.graphs);
  std::vector<AdmissibleGraph> kept;
  std::vector<QDiffOp> ops;
  for (const auto& g : graphs) {
    auto ex = exact_weight(g);
    if (ex && ex->value == 0.0) continue;
    auto op = u_gamma_operator(g, fields);
    if (op.is_zero()) continue;
    kept.push_back(g);
    ops.push_back(std::move(op));
  }
  auto ws = weights.weights(kept);
  AOp out(d, m);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (log) log->push_back({graph_key(kept[i]), ws[i]});
    if (ws[i].exact && ws[i].value == 0.0) continue;
    out += weight_scalar(ws[i]) * ops[i].cast<Approx>();
  }
  return out;
}

AForm taylor_S(const std::vector<QPolyVector>& fields, const AChain& chain, WeightProvider& weights,
               const TruncationPolicy& policy, std::vector<WeightRecord>* log) {
  const int n = static_cast<int>(fields.size());
  const int d = std::max(field_dim(fields), chain.dim());
  const int m = chain.length();
  std::vector<int> valences;
  int total = 0;
  for (const auto& f : fields) {
    valences.push_back(f.degree());
    total += f.degree();
  }
  const int l = 2 * n + m - 1 - total;
  if (l < 0 || l > d) return AForm(d, std::clamp(l, 0, d));
  check_budget(n, m, policy);
  auto graphs = enumerate_shoikhet(n, m, l, valences, policy.graphs);
  std::vector<AdmissibleGraph> kept;
  std::vector<AForm> forms;
  for (const auto& g : graphs) {
    auto ex = exact_weight(g);
    if (ex && ex->value == 0.0) continue;
    AForm acc(d, l);
    bool any = false;
    for (const auto& [w, c] : chain.terms()) {
      std::vector<QPoly> entries;
      for (const auto& mono : w) entries.push_back(word_entry(d, mono));
      QForm f = s_gamma_graph(g, fields, entries);
      if (f.is_zero()) continue;
      any = true;
      acc += c * f.cast<Approx>();
    }
    if (!any) continue;
    kept.push_back(g);
    forms.push_back(std::move(acc));
  }
  auto ws = weights.weights(kept);
  AForm out(d, l);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (log) log->push_back({graph_key(kept[i]), ws[i]});
    if (ws[i].exact && ws[i].value == 0.0) continue;
    out += weight_scalar(ws[i]) * forms[i];
  }
  return out;
}

nlohmann::json Calibration::to_json() const {
  return {{"sign", sign},
          {"kappa", kappa.get_str()},
          {"measured", measured},
          {"measured_error", measured_error}};
}

Calibration Calibration::from_json(const nlohmann::json& j) {
  Calibration c;
  c.sign = j.at("sign").get<int>();
  c.kappa = Rational(j.at("kappa").get<std::string>());
  c.kappa.canonicalize();
  c.measured = j.value("measured", 1.0);
  c.measured_error = j.value("measured_error", 0.0);
  if ((c.sign != 1 && c.sign != -1) || sgn(c.kappa) <= 0) throw ParseError("calibration: invalid constants");
  return c;
}

Calibration calibrate(WeightProvider& weights, const TruncationPolicy& policy) {
  QPolyVector pi(2, 2);
  pi.add(3, QPoly::constant(2, 1));
  AOp b1 = taylor_U({pi}, weights, policy);
  APoly x = APoly::variable(2, 0), y = APoly::variable(2, 1);
  APoly comm = b1.apply({x, y}) - b1.apply({y, x});
  Approx c = comm.coefficient(Monomial{});
  Calibration cal;
  cal.measured = c.value / 2.0;
  cal.measured_error = c.error / 2.0;
  cal.sign = cal.measured < 0 ? -1 : 1;
  double mag = std::abs(cal.measured);
  double best = 1e300;
  for (Rational k : {Rational(1), Rational(1, 2), Rational(2)}) {
    double dist = std::abs(std::log(mag / k.get_d()));
    if (dist < best) {
      best = dist;
      cal.kappa = k;
    }
  }
  return cal;
}

Calibration load_or_calibrate(const std::string& path, WeightProvider& weights, const TruncationPolicy& policy) {
  if (!path.empty()) {
    std::ifstream in(path);
    if (in) {
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("calibration file " + path + ": " + e.what());
      }
      return Calibration::from_json(j);
    }
  }
  Calibration cal = calibrate(weights, policy);
  if (!path.empty()) {
    std::ofstream out(path);
    out << cal.to_json().dump() << "\n";
  }
  return cal;
}

StarProduct star_product(const QPolyVector& pi, WeightProvider& weights, const TruncationPolicy& policy,
                         const Calibration& cal) {
  if (pi.degree() != 2) throw ValidationError("star product needs a bivector");
  StarProduct out;
  out.jacobi = schouten_sn(pi, pi).is_zero();
  if (!out.jacobi) std::cerr << "{\"warning\":\"bivector fails the Jacobi identity\"}\n";
  QPolyVector ps = cal.scale() * pi;
  const int d = pi.dim();
  std::vector<AOp> comps{AOp::product(d)};
  for (int k = 1; k <= policy.order; ++k) {
    std::vector<QPolyVector> fields(k, ps);
    AOp bk = taylor_U(fields, weights, policy, &out.weights);
    comps.push_back(Approx(Rational(1 / factorial(k))) * bk);
  }
  out.algebra = AStar(d, comps);
  return out;
}

HbarSeries<APoly> star_apply(const StarProduct& s, const QPoly& f, const QPoly& g) {
  return s.algebra.star(f.cast<Approx>(), g.cast<Approx>());
}

HbarSeries<AOp> tangent_U(const QPolyVector& pi, const QPolyVector& alpha, WeightProvider& weights,
                          const TruncationPolicy& policy, const Calibration& cal) {
  QPolyVector ps = cal.scale() * pi;
  const int d = std::max(pi.dim(), alpha.dim());
  HbarSeries<AOp> out(policy.order, AOp(d, alpha.degree()));
  for (int n = 0; n <= policy.order; ++n) {
    std::vector<QPolyVector> fields{alpha};
    fields.insert(fields.end(), n, ps);
    out[n] = Approx(Rational(1 / factorial(n))) * taylor_U(fields, weights, policy);
  }
  return out;
}

HbarSeries<AForm> tangent_S(const QPolyVector& pi, const AChain& chain, WeightProvider& weights,
                            const TruncationPolicy& policy, const Calibration& cal) {
  QPolyVector ps = cal.scale() * pi;
  const int d = std::max(pi.dim(), chain.dim());
  const int l = std::min(chain.n(), d);
  HbarSeries<AForm> out(policy.order, AForm(d, l));
  for (int n = 0; n <= policy.order; ++n) {
    std::vector<QPolyVector> fields(n, ps);
    out[n] = Approx(Rational(1 / factorial(n))) * taylor_S(fields, chain, weights, policy);
  }
  return out;
}

double homotopy_residual(const AForm& delta, const QPolyVector& pi, int eta_degree) {
  if (delta.is_zero()) return 0.0;
  const int d = std::max(delta.dim(), pi.dim());
  const int deg = delta.degree() + pi.degree() - 1;
  if (deg < 0 || deg > d) return delta.max_abs();
  std::map<std::pair<Mask, Monomial>, int> rows;
  auto row_of = [&](Mask m, const Monomial& mono) {
    auto [it, fresh] = rows.emplace(std::make_pair(m, mono), static_cast<int>(rows.size()));
    return it->second;
  };
  for (const auto& [m, p] : delta.components())
    for (const auto& [mono, c] : p.terms()) row_of(m, mono);
  std::vector<std::vector<std::pair<int, double>>> cols;
  for (Mask m = 0; m < (Mask{1} << d); ++m) {
    if (mask_size(m) != deg) continue;
    for (const auto& mono : monomials_up_to(d, eta_degree)) {
      QForm eta(d, deg);
      eta.add(m, QPoly::monomial(d, mono, 1));
      QForm img = lie_derivative(pi, eta);
      std::vector<std::pair<int, double>> col;
      for (const auto& [mi, p] : img.components())
        for (const auto& [mono2, c] : p.terms()) col.emplace_back(row_of(mi, mono2), c.get_d());
      if (!col.empty()) cols.push_back(std::move(col));
    }
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()),
                                            static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& [r, v] : cols[j]) a(r, static_cast<Eigen::Index>(j)) = v;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
  for (const auto& [m, p] : delta.components())
    for (const auto& [mono, c] : p.terms()) b(rows.at({m, mono})) = c.value;
  if (cols.empty()) return b.cwiseAbs().maxCoeff();
  Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
  return (a * x - b).cwiseAbs().maxCoeff();
}

CapReport cap_report(const QPolyVector& alpha, const QChain& chain, const QPolyVector& pi,
                     WeightProvider& weights, const TruncationPolicy& policy, const Calibration& cal) {
  const int order = policy.order;
  const int d = std::max({alpha.dim(), chain.dim(), pi.dim()});
  AChain c = chain.cast<Approx>();
  AField a = alpha.cast<Approx>();

  CapReport rep;
  auto sc = tangent_S(pi, c, weights, policy, cal);
  rep.lhs = HbarSeries<AForm>(order, AForm(d, 0));
  for (int k = 0; k <= order; ++k) rep.lhs[k] = contract(a, sc[k]);

  auto u = tangent_U(pi, alpha, weights, policy, cal);
  auto star = star_product(pi, weights, policy, cal);
  auto capped = star.algebra.cap(u, c);
  rep.rhs = HbarSeries<AForm>(order, AForm(d, 0));
  for (int i = 0; i <= order; ++i) {
    if (capped[i].is_zero()) continue;
    TruncationPolicy sub = policy;
    sub.order = order - i;
    auto s = tangent_S(pi, capped[i], weights, sub, cal);
    for (int j = 0; j <= sub.order; ++j) {
      if (s[j].is_zero()) continue;
      rep.rhs[i + j] = rep.rhs[i + j].is_zero() ? s[j] : rep.rhs[i + j] + s[j];
    }
  }

  QPolyVector ps = cal.scale() * pi;
  rep.delta = HbarSeries<AForm>(order, AForm(d, 0));
  rep.pass = true;
  for (int k = 0; k <= order; ++k) {
    rep.delta[k] = difference(rep.lhs[k], rep.rhs[k]);
    CapOrder o;
    o.order = k;
    o.lhs_norm = rep.lhs[k].max_abs();
    o.rhs_norm = rep.rhs[k].max_abs();
    o.delta_norm = rep.delta[k].max_abs();
    o.delta_error = rep.delta[k].max_error();
    o.eta_degree = max_degree(rep.delta[k]) + 2;
    o.homotopy_residual = k == 0 ? o.delta_norm : homotopy_residual(rep.delta[k], ps, o.eta_degree);
    o.tolerance = std::max(policy.tolerance, 4 * o.delta_error);
    o.pass = o.homotopy_residual <= o.tolerance;
    rep.pass = rep.pass && o.pass;
    rep.orders.push_back(o);
  }
  return rep;
}

nlohmann::json CapReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  for (const auto& o : orders)
    j["orders"].push_back({{"order", o.order},
                           {"lhs_norm", o.lhs_norm},
                           {"rhs_norm", o.rhs_norm},
                           {"delta_norm", o.delta_norm},
                           {"delta_error", o.delta_error},
                           {"homotopy_residual", o.homotopy_residual},
                           {"eta_degree", o.eta_degree},
                           {"tolerance", o.tolerance},
                           {"pass", o.pass},
                           {"delta", delta[o.order].to_string()}});
  return j;
}

QPolyVector bivector_from_json(const nlohmann::json& j) {
  try {
    int d = j.at("dim").get<int>();
    QPolyVector pi(d, 2);
    for (const auto& row : j.at("pi")) {
      int i = row.at(0).get<int>(), k = row.at(1).get<int>();
      if (i < 1 || k < 1 || i > d || k > d || i == k) throw ParseError("bivector: bad index pair");
      pi.add_full({i - 1, k - 1}, parse_poly(row.at(2).get<std::string>(), d));
    }
    return pi;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bivector JSON: ") + e.what());
  }
}

nlohmann::json to_json(const QPolyVector& pi) {
  nlohmann::json j;
  j["dim"] = pi.dim();
  j["pi"] = nlohmann::json::array();
  for (const auto& [m, p] : pi.components()) {
    auto idx = mask_indices(m);
    j["pi"].push_back({idx[0] + 1, idx[1] + 1, p.to_string()});
  }
  return j;
}

}  // namespace fkit
