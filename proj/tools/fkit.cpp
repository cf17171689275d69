#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "fkit/suites.hpp"

using namespace fkit;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFail = 1, kParse = 2, kBudget = 3, kVerify = 4 };

struct Options {
  int order = 2;
  std::int64_t samples = 1 << 18;
  std::uint64_t seed = 1;
  double tol = 5e-2;
  std::string cache;
  int jobs = 0;
  std::string out;
};

json read_json_arg(const std::string& arg) {
  if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) return json::parse(arg);
  std::ifstream in(arg);
  if (!in) throw ParseError("cannot open '" + arg + "'");
  return json::parse(in);
}

void emit(const Options& o, const json& j) {
  std::string text = j.dump(2);
  if (o.out.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw ParseError("cannot write '" + o.out + "'");
  f << text << "\n";
}

void diag(const std::string& kind, const std::string& what, const json& extra = {}) {
  json j{{"error", kind}, {"message", what}};
  if (!extra.is_null()) j["detail"] = extra;
  std::cerr << j.dump() << "\n";
}

QmcOptions qmc_of(const Options& o) {
  QmcOptions q;
  q.samples = o.samples;
  q.seed = o.seed;
  q.jobs = o.jobs > 0 ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  return q;
}

std::string cache_of(const Options& o) { return o.cache.empty() ? WeightCache::default_path() : o.cache; }

json poly_json(const APoly& p) {
  json terms = json::array();
  for (const auto& [m, c] : p.terms())
    terms.push_back({{"monomial", QPoly::monomial(p.dim(), m, 1).to_string()},
                     {"value", c.value},
                     {"std_error", c.error}});
  return terms;
}

int cmd_weight(const Options& o, const std::string& graph_text) {
  AdmissibleGraph g = graph_from_json(read_json_arg(graph_text));
  auto problems = validate(g);
  if (!problems.empty()) {
    diag("invalid_graph", problems.front(), problems);
    return kParse;
  }
  WeightCache cache(cache_of(o));
  QmcOptions q = qmc_of(o);
  auto w = g.has_special() ? shoikhet_weight(g, q, &cache) : kontsevich_weight(g, q, &cache);
  if (!cache.path().empty()) cache.flush();
  emit(o, {{"graph", graph_key(g)},
           {"value", w.value},
           {"std_error", w.std_error},
           {"samples", w.samples},
           {"seed", w.seed},
           {"exact", w.exact}});
  return kOk;
}

int cmd_star(const Options& o, const std::string& poisson, const std::string& f, const std::string& g) {
  QPolyVector pi = bivector_from_json(read_json_arg(poisson));
  SuiteContext ctx(qmc_of(o), cache_of(o), o.order, o.tol);
  auto s = star_product(pi, ctx.provider(), ctx.policy, ctx.calibration());
  auto r = star_apply(s, parse_poly(f, pi.dim()), parse_poly(g, pi.dim()));
  json series = json::array();
  for (std::size_t k = 0; k < r.c.size(); ++k)
    series.push_back({{"order", k}, {"text", r.c[k].to_string()}, {"terms", poly_json(r.c[k])}});
  ctx.flush();
  emit(o, {{"f", f},
           {"g", g},
           {"jacobi", s.jacobi},
           {"calibration", ctx.calibration().to_json()},
           {"series", series}});
  return kOk;
}

int cmd_verify(const Options& o, const std::string& suite, const std::vector<std::string>& args) {
  SuiteContext ctx(qmc_of(o), cache_of(o), o.order, o.tol);
  SuiteResult r = run_suite(suite, ctx, args);
  ctx.flush();
  json j{{"suite", r.name}, {"pass", r.pass}, {"report", r.report}};
  emit(o, j);
  if (!r.pass) {
    diag("verification_failed", suite, r.report);
    return kVerify;
  }
  return kOk;
}

int cmd_duflo(const Options& o, const std::string& algebra, const std::string& element, int degree) {
  LieAlgebra L = (algebra.find('{') != std::string::npos || algebra.find('.') != std::string::npos)
                     ? LieAlgebra::from_json(read_json_arg(algebra))
                     : LieAlgebra::named(algebra);
  QPoly p = parse_poly(element, L.dim());
  if (degree < 0) degree = std::max(p.degree(), 2);
  UEA U(L);
  auto J = duflo_J(L, degree);
  auto d = duflo_map(U, J, p);
  emit(o, {{"algebra", L.name()},
           {"element", element},
           {"degree", degree},
           {"J_half", J.J_half.to_string()},
           {"value", d.to_string()},
           {"exact", true}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fkit: graph weights, star products and formality checks"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--order", o.order, "hbar truncation order")->check(CLI::NonNegativeNumber);
    c->add_option("--samples", o.samples, "QMC samples per weight")->check(CLI::PositiveNumber);
    c->add_option("--seed", o.seed, "QMC seed");
    c->add_option("--tol", o.tol, "coefficient tolerance")->check(CLI::PositiveNumber);
    c->add_option("--cache", o.cache, "weight cache file (default $FKIT_CACHE)");
    c->add_option("--jobs", o.jobs, "worker threads (default: all cores)");
    c->add_option("--out", o.out, "write the JSON report here");
  };

  std::string graph;
  auto* weight = app.add_subcommand("weight", "estimate the weight of one graph");
  weight->add_option("graph", graph, "graph JSON file or inline JSON")->required();
  common(weight);

  std::string poisson, f, g;
  auto* star = app.add_subcommand("star", "hbar series of f star g");
  star->add_option("poisson", poisson, "bivector JSON file or inline JSON")->required();
  star->add_option("f", f)->required();
  star->add_option("g", g)->required();
  common(star);

  std::string suite;
  std::vector<std::string> suite_args;
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite)->required()->check(CLI::IsMember(suite_names()));
  verify->add_option("args", suite_args, "suite arguments (duflo: algebra name)");
  common(verify);

  std::string algebra, element;
  int degree = -1;
  auto* duflo = app.add_subcommand("duflo", "Duflo image of a polynomial in PBW form");
  duflo->add_option("algebra", algebra, "abelian | heisenberg | sl2 | so3 | JSON file")->required();
  duflo->add_option("element", element)->required();
  duflo->add_option("--degree", degree, "truncation degree of J^(1/2)");
  common(duflo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    diag("usage", e.what());
    return kParse;
  }

  try {
    if (*weight) return cmd_weight(o, graph);
    if (*star) return cmd_star(o, poisson, f, g);
    if (*verify) return cmd_verify(o, suite, suite_args);
    if (*duflo) return cmd_duflo(o, algebra, element, degree);
  } catch (const CapacityError& e) {
    diag("budget_exceeded", e.what());
    return kBudget;
  } catch (const ParseError& e) {
    diag("parse", e.what());
    return kParse;
  } catch (const ValidationError& e) {
    diag("validation", e.what());
    return kParse;
  } catch (const json::exception& e) {
    diag("parse", e.what());
    return kParse;
  } catch (const std::exception& e) {
    diag("internal", e.what());
    return kFail;
  }
  return kFail;
}
