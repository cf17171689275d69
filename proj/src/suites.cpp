#include "fkit/suites.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace fkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

VertexRef v(int k) { return VertexRef::first(k); }
VertexRef b(int k) { return VertexRef::second(k); }
VertexRef o() { return VertexRef::special(); }

QPoly qvar(int d, int i) { return QPoly::variable(d, i); }

/// |x - target| <= max(k sigma, floor)
bool within(double x, double target, double sigma, double k = 3.0, double floor = 1e-12) {
  return std::abs(x - target) <= std::max(k * sigma, floor);
}

nlohmann::json weight_json(const AdmissibleGraph& g, const WeightEstimate& w) {
  return {{"graph", graph_key(g)},
          {"value", w.value},
          {"std_error", w.std_error},
          {"samples", w.samples},
          {"exact", w.exact}};
}

std::vector<QPoly> monomial_basis(int d, int degree) {
  std::vector<QPoly> out;
  for (const auto& m : monomials_up_to(d, degree)) out.push_back(QPoly::monomial(d, m, 1));
  return out;
}

}  // namespace

SuiteContext::SuiteContext(QmcOptions q, std::string cache_path, int order, double tolerance)
    : qmc(q), cache_path_(std::move(cache_path)) {
  policy.order = order;
  policy.tolerance = tolerance;
  cache_ = std::make_unique<WeightCache>(cache_path_);
  provider_ = std::make_unique<QmcWeightProvider>(qmc, cache_.get());
}

SuiteContext::~SuiteContext() {
  try {
    flush();
  } catch (...) {
  }
}

std::string SuiteContext::calibration_path() const {
  return cache_path_.empty() ? std::string() : cache_path_ + ".calibration.json";
}

const Calibration& SuiteContext::calibration() {
  if (!cal_) {
    TruncationPolicy p = policy;
    p.order = 1;
    cal_ = load_or_calibrate(calibration_path(), *provider_, p);
  }
  return *cal_;
}

void SuiteContext::flush() {
  if (!cache_path_.empty()) cache_->flush();
}

void CoefficientCheck::add(const APoly& p) {
  for (const auto& [m, c] : p.terms()) {
    ++checked;
    max_abs = std::max(max_abs, std::abs(c.value));
    max_error = std::max(max_error, c.error);
    if (std::abs(c.value) > std::max(floor, k * c.error)) ++failures;
  }
}

void CoefficientCheck::add(const AOp& op) {
  for (const auto& [s, c] : op.terms()) add(c);
}

void CoefficientCheck::add(const AForm& w) {
  for (const auto& [m, c] : w.components()) add(c);
}

nlohmann::json CoefficientCheck::to_json() const {
  return {{"checked", checked},
          {"failures", failures},
          {"max_abs", max_abs},
          {"max_error", max_error},
          {"floor", floor},
          {"k", k}};
}

QPolyVector sl2_bivector() { return kks_bivector(LieAlgebra::sl2()); }

QPolyVector constant_bivector() {
  QPolyVector pi(2, 2);
  pi.add(3, QPoly::constant(2, 1));
  return pi;
}

std::vector<AdmissibleGraph> stratum_test_graphs() {
  return {AdmissibleGraph(3, 1, true, {{}, {b(1)}, {v(2), b(1)}, {v(2)}}),
          AdmissibleGraph(3, 1, true, {{}, {v(3), b(1)}, {b(1)}, {v(3)}})};
}

AdmissibleGraph stratum_decay_graph() { return AdmissibleGraph(2, 1, true, {{}, {v(1), b(1)}, {}}); }

AdmissibleGraph wheel_graph(int spokes) {
  if (spokes == 1) return AdmissibleGraph(1, 1, true, {{o(), b(1)}, {}});
  if (spokes == 2) return AdmissibleGraph(2, 1, true, {{v(2), b(1)}, {v(1), b(1)}, {}});
  throw ValidationError("wheel_graph: only 1 and 2 spokes are provided");
}

// ---------------------------------------------------------------------------

SuiteResult suite_degree_filter(SuiteContext& ctx) {
  auto t0 = Clock::now();
  std::int64_t checked = 0, failures = 0, families = 0, api_checked = 0;
  std::string first_failure;
  auto check = [&](const AdmissibleGraph& g) {
    ++checked;
    auto w = exact_weight(g);
    if (!w || !w->exact || w->value != 0.0 || w->samples != 0) {
      ++failures;
      if (first_failure.empty()) first_failure = graph_key(g);
    }
    return true;
  };
  for (int special = 0; special < 2; ++special)
    for (int n = 0; n <= 3; ++n)
      for (int m = special; m <= 3; ++m) {
        if (!special && 2 * n + m - 2 < 0) continue;
        const int dim = special ? 2 * n + m - 1 : 2 * n + m - 2;
        const int nv = n + special;
        std::vector<int> val(nv, 0);
        while (true) {
          int total = 0;
          for (int x : val) total += x;
          if (total != dim) {
            ++families;
            std::vector<int> aerial(val.begin(), val.begin() + n);
            std::optional<AdmissibleGraph> sample;
            auto visit = [&](const AdmissibleGraph& g) {
              if (!sample) sample = g;
              return check(g);
            };
            if (special)
              visit_shoikhet(n, m, val[n], aerial, ctx.policy.graphs, visit);
            else
              visit_kontsevich(n, m, aerial, ctx.policy.graphs, visit);
            // one graph per family through the public estimator
            if (sample) {
              ++api_checked;
              auto w = special ? shoikhet_weight(*sample, ctx.qmc) : kontsevich_weight(*sample, ctx.qmc);
              if (!w.exact || w.value != 0.0 || w.samples != 0) {
                ++failures;
                if (first_failure.empty()) first_failure = graph_key(*sample);
              }
            }
          }
          int i = 0;
          while (i < nv && ++val[i] == 4) val[i++] = 0;
          if (i == nv) break;
        }
      }
  SuiteResult r{"degree_filter", failures == 0, {}};
  r.report = {{"graphs", checked},
              {"families", families},
              {"estimator_calls", api_checked},
              {"failures", failures},
              {"seconds", seconds_since(t0)}};
  if (!first_failure.empty()) r.report["first_failure"] = first_failure;
  return r;
}

SuiteResult suite_wedge(SuiteContext& ctx) {
  auto t0 = Clock::now();
  QmcOptions q = ctx.qmc;
  q.samples = std::max<std::int64_t>(q.samples, 1'000'000);
  AdmissibleGraph wedge(1, 2, false, {{b(1), b(2)}});
  auto w = kontsevich_weight(wedge, q);
  SuiteResult r{"wedge", std::abs(w.value - 0.5) <= 0.01, {}};
  r.report = weight_json(wedge, w);
  r.report["seconds"] = seconds_since(t0);
  return r;
}

SuiteResult suite_hkr(SuiteContext& ctx) {
  SuiteResult r{"hkr", true, {}};
  Rational fact = 1;
  for (int m = 1; m <= 3; ++m) {
    fact *= m;
    std::vector<VertexRef> star;
    for (int k = 1; k <= m; ++k) star.push_back(b(k));
    AdmissibleGraph fan(1, m, false, {star});
    auto w = ctx.provider().weights({fan})[0];
    bool ok = within(w.value, 1.0 / fact.get_d(), w.std_error);
    r.pass = r.pass && ok;
    auto j = weight_json(fan, w);
    j["expected"] = 1.0 / fact.get_d();
    j["pass"] = ok;
    r.report["fans"].push_back(j);
  }

  // tangent_U at hbar^0 against hkr_cochain
  TruncationPolicy p0 = ctx.policy;
  p0.order = 0;
  std::vector<std::pair<std::string, QPolyVector>> alphas;
  {
    QPolyVector a(2, 2);
    a.add(3, QPoly::constant(2, 1));
    alphas.emplace_back("d1^d2", a);
    QPolyVector x(2, 1);
    x.add(2, qvar(2, 0));
    alphas.emplace_back("x1*d2", x);
    QPolyVector t(3, 3);
    t.add(7, qvar(3, 2) * qvar(3, 0));
    alphas.emplace_back("x1*x3*d1^d2^d3", t);
    alphas.emplace_back("x1*d2+x2*d3 on sl2", sl2_bivector());
  }
  for (const auto& [name, a] : alphas) {
    auto u = tangent_U(sl2_bivector(), a, ctx.provider(), p0, ctx.calibration());
    AOp diff = u[0] - hkr_cochain(a).cast<Approx>();
    CoefficientCheck c;
    c.k = 3.0;
    c.floor = 1e-12;
    c.add(diff);
    r.pass = r.pass && c.pass();
    auto j = c.to_json();
    j["alpha"] = name;
    r.report["tangent_U"].push_back(j);
  }

  // S_0 against hkr_chain
  for (const char* chain : {"x1 | x2", "1 | x1 | x2", "x1^2 | x2 | x1*x2", "x3 | x1 | x2 | x3^2", "x1*x2 | x2^2"}) {
    QChain c = parse_chain(chain);
    auto s = tangent_S(sl2_bivector(), c.cast<Approx>(), ctx.provider(), p0, ctx.calibration());
    AForm expect = hkr_chain(c).cast<Approx>();
    AForm diff = s[0].degree() == expect.degree() ? s[0] - expect : s[0];
    CoefficientCheck cc;
    cc.k = 3.0;
    cc.floor = 1e-12;
    cc.add(diff);
    r.pass = r.pass && cc.pass();
    auto j = cc.to_json();
    j["chain"] = chain;
    r.report["tangent_S"].push_back(j);
  }
  r.report["pass"] = r.pass;
  return r;
}

SuiteResult suite_commutator(SuiteContext& ctx) {
  const Calibration& cal = ctx.calibration();
  TruncationPolicy p = ctx.policy;
  p.order = 1;
  auto s = star_product(constant_bivector(), ctx.provider(), p, cal);
  QPoly x = qvar(2, 0), y = qvar(2, 1);
  auto xy = star_apply(s, x, y), yx = star_apply(s, y, x);
  // f*g - g*f = 2 hbar <pi, df^dg> with <pi, dx^dy> = pi^{12} = 1
  APoly resid = xy[1] - yx[1] - APoly::constant(2, Approx(2.0));
  CoefficientCheck c;
  c.k = 0.0;
  c.floor = 2e-2;
  c.add(resid);
  APoly r0 = xy[0] - yx[0];
  c.add(r0);
  SuiteResult r{"commutator", c.pass(), {}};
  r.report = {{"calibration", cal.to_json()},
              {"residual", c.to_json()},
              {"commutator_hbar1", (xy[1] - yx[1]).to_string()}};
  return r;
}

SuiteResult suite_assoc(SuiteContext& ctx) {
  auto t0 = Clock::now();
  SuiteResult r{"assoc", true, {}};
  const Calibration& cal = ctx.calibration();
  for (const auto& [name, pi] : std::vector<std::pair<std::string, QPolyVector>>{
           {"constant", constant_bivector()}, {"sl2", sl2_bivector()}}) {
    auto s = star_product(pi, ctx.provider(), ctx.policy, cal);
    auto assoc = s.algebra.associator();
    const int d = pi.dim();
    auto basis = monomial_basis(d, 2);
    std::vector<CoefficientCheck> per(ctx.policy.order + 1);
    for (auto& c : per) {
      c.floor = ctx.policy.tolerance;
      c.k = 4.0;
    }
    for (const auto& f : basis)
      for (const auto& g : basis)
        for (const auto& h : basis) {
          std::vector<APoly> args{f.cast<Approx>(), g.cast<Approx>(), h.cast<Approx>()};
          for (int k = 0; k <= ctx.policy.order; ++k) per[k].add(assoc[k].apply(args));
        }
    nlohmann::json j{{"bivector", name}, {"jacobi", s.jacobi}, {"mc_residual", s.algebra.mc_residual()}};
    for (int k = 0; k <= ctx.policy.order; ++k) {
      auto jk = per[k].to_json();
      jk["order"] = k;
      j["orders"].push_back(jk);
      r.pass = r.pass && per[k].pass();
    }
    j["weights"] = s.weights.size();
    r.report["cases"].push_back(j);
  }
  r.report["seconds"] = seconds_since(t0);
  r.report["pass"] = r.pass;
  return r;
}

SuiteResult suite_wheels(SuiteContext& ctx) {
  SuiteResult r{"wheels", true, {}};
  for (int spokes : {1, 2}) {
    auto g = wheel_graph(spokes);
    auto w = ctx.provider().weights({g})[0];
    bool ok = within(w.value, 0.0, w.std_error);
    r.pass = r.pass && ok;
    auto j = weight_json(g, w);
    j["spokes"] = spokes;
    j["pass"] = ok;
    r.report["wheels"].push_back(j);
  }
  const QPolyVector pi = sl2_bivector();
  for (bool ordered : {false, true}) {
    TruncationPolicy p = ctx.policy;
    p.graphs.ordered_pair_edges = ordered;
    CoefficientCheck c;
    c.k = 4.0;
    c.floor = 1e-12;
    for (const auto& a0 : monomial_basis(3, 2)) {
      AChain chain(std::vector<APoly>{a0.cast<Approx>()});
      auto s = tangent_S(pi, chain, ctx.provider(), p, ctx.calibration());
      c.add(s[0] - AForm::function(a0.cast<Approx>()));
      for (int k = 1; k <= p.order; ++k) c.add(s[k]);
    }
    r.pass = r.pass && c.pass();
    auto j = c.to_json();
    j["ordered_pair_edges"] = ordered;
    r.report["S_identity"].push_back(j);
  }
  r.report["pass"] = r.pass;
  return r;
}

SuiteResult suite_strata(SuiteContext& ctx) {
  SuiteResult r{"strata", true, {}};
  std::mt19937_64 rng(ctx.qmc.seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  auto graphs = stratum_test_graphs();
  graphs.push_back(stratum_decay_graph());
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& g = graphs[gi];
    const bool identity_case = gi < 2;
    auto g0 = origin_collapse(g);
    nlohmann::json j{{"graph", graph_key(g)}, {"collapsed", graph_key(g0)}};
    if (identity_case) {
      auto ws = stratum_weight_origin(g, ctx.qmc);
      auto w0 = ctx.provider().weights({g0})[0];
      double sigma = std::hypot(ws.std_error, w0.std_error);
      bool ok = within(ws.value, w0.value, sigma);
      j["stratum"] = {{"value", ws.value}, {"std_error", ws.std_error}, {"samples", ws.samples}};
      j["collapsed_weight"] = {{"value", w0.value}, {"std_error", w0.std_error}, {"samples", w0.samples}};
      j["identity_pass"] = ok;
      r.pass = r.pass && ok;
    }
    // pointwise residual at shrinking eps, max over random chart points
    const int dim = 2 * g0.n() + g0.m() - 1;
    std::vector<std::vector<double>> pts;
    for (int t = 0; t < 16; ++t) {
      std::vector<double> u(static_cast<std::size_t>(dim));
      for (auto& x : u) x = unit(rng);
      pts.push_back(u);
    }
    std::vector<double> res;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      double worst = 0.0;
      for (const auto& u : pts) {
        try {
          worst = std::max(worst, pointwise_collapse_check(g, u, eps));
        } catch (const DegenerateConfiguration&) {
        }
      }
      res.push_back(worst);
    }
    bool small = res[2] < 1e-3;
    // linear decay: each tenfold step in eps cuts the residual about tenfold
    bool linear = true;
    if (res[0] > 1e-13) {
      for (int k = 0; k + 1 < 3; ++k) {
        double ratio = res[k] / std::max(res[k + 1], 1e-300);
        linear = linear && ratio > 5.0 && ratio < 20.0;
      }
    } else {
      linear = res[1] <= 1e-13 && res[2] <= 1e-13;
    }
    j["pointwise"] = {{"eps", {1e-2, 1e-3, 1e-4}}, {"residual", res}, {"below_1e-3", small}, {"linear", linear}};
    r.pass = r.pass && small && linear;
    r.report["graphs"].push_back(j);
  }
  r.report["pass"] = r.pass;
  return r;
}

SuiteResult suite_lemmas(SuiteContext& ctx) {
  SuiteResult r{"lemmas", true, {}};
  for (const auto& p : lemma_probes(1e-4, static_cast<unsigned>(ctx.qmc.seed))) {
    bool ok = p.residual < 1e-3;
    r.pass = r.pass && ok;
    r.report["probes"].push_back({{"name", p.name}, {"epsilon", p.epsilon}, {"residual", p.residual}, {"pass", ok}});
  }
  r.report["pass"] = r.pass;
  return r;
}

SuiteResult suite_cap(SuiteContext& ctx) {
  SuiteResult r{"cap", true, {}};
  const Calibration& cal = ctx.calibration();
  {
    QPolyVector alpha(2, 2);
    alpha.add(3, QPoly::constant(2, 1));
    TruncationPolicy p = ctx.policy;
    p.order = std::min(2, std::max(1, ctx.policy.order));
    auto rep = cap_report(alpha, parse_chain("x1 | x2"), constant_bivector(), ctx.provider(), p, cal);
    auto j = rep.to_json();
    j["case"] = "constant pi, alpha = d1^d2, c = (x1|x2)";
    r.pass = r.pass && rep.pass;
    r.report["cases"].push_back(j);
  }
  {
    QPoly casimir = parse_poly("x1^2 + 4*x2*x3", 3);
    QPolyVector alpha = QPolyVector::function(casimir);
    TruncationPolicy p = ctx.policy;
    p.order = 1;
    auto rep = cap_report(alpha, parse_chain("x1", 3), sl2_bivector(), ctx.provider(), p, cal);
    auto j = rep.to_json();
    j["case"] = "sl2 pi, alpha = Casimir, c = (x1)";
    r.pass = r.pass && rep.pass;
    r.report["cases"].push_back(j);
  }
  r.report["pass"] = r.pass;
  return r;
}

SuiteResult suite_duflo(const std::string& algebra, int degree) {
  auto t0 = Clock::now();
  SuiteResult r{"duflo", true, {}};
  std::vector<std::string> names;
  if (algebra.empty())
    names = {"sl2", "heisenberg", "abelian"};
  else
    names = {algebra};
  for (const auto& name : names) {
    LieAlgebra L = LieAlgebra::named(name);
    auto rep = duflo_theorem_check(L, degree);
    auto j = rep.to_json();
    auto J = duflo_J(L, degree);
    bool trivial_J = J.J == QPoly::constant(L.dim(), 1);
    j["J"] = J.J.to_string();
    j["J_is_one"] = trivial_J;
    bool ok = rep.pass;
    if (name == "heisenberg" || name == "abelian") ok = ok && trivial_J;
    if (name == "sl2") {
      UEA U(L);
      QPoly c = parse_poly("x1^2 + 4*x2*x3", 3);
      auto dc = duflo_map(U, J, c);
      bool square = duflo_map(U, J, c * c) == U.product(dc, dc);
      bool central = true;
      for (int i = 0; i < 3; ++i) central = central && U.commutator(dc, U.generator(i)).is_zero();
      j["D(C)"] = dc.to_string();
      j["D(C^2) == D(C)^2"] = square;
      j["D(C) central"] = central;
      ok = ok && square && central;
    }
    j["pass"] = ok;
    r.pass = r.pass && ok;
    r.report["algebras"].push_back(j);
  }
  r.report["exact"] = true;
  r.report["seconds"] = seconds_since(t0);
  r.report["pass"] = r.pass;
  return r;
}

std::vector<std::string> suite_names() {
  return {"assoc", "commutator", "hkr", "wheels", "strata", "cap", "duflo", "degree", "wedge", "lemmas"};
}

SuiteResult run_suite(const std::string& name, SuiteContext& ctx, const std::vector<std::string>& args) {
  if (name == "assoc") return suite_assoc(ctx);
  if (name == "commutator") return suite_commutator(ctx);
  if (name == "hkr") return suite_hkr(ctx);
  if (name == "wheels") return suite_wheels(ctx);
  if (name == "strata") return suite_strata(ctx);
  if (name == "cap") return suite_cap(ctx);
  if (name == "duflo") return suite_duflo(args.empty() ? "" : args[0]);
  if (name == "degree") return suite_degree_filter(ctx);
  if (name == "wedge") return suite_wedge(ctx);
  if (name == "lemmas") return suite_lemmas(ctx);
  throw ParseError("unknown suite '" + name + "'");
}

}  // namespace fkit
