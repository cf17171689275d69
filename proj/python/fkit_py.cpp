#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fkit/suites.hpp"

namespace py = pybind11;
using namespace fkit;
using nlohmann::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::object& o) {
  if (py::isinstance<py::str>(o)) return json::parse(o.cast<std::string>());
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

QmcOptions qmc(std::int64_t samples, std::uint64_t seed, int jobs) {
  QmcOptions q;
  q.samples = samples;
  q.seed = seed;
  q.jobs = jobs;
  return q;
}

json poly_json(const APoly& p) {
  json terms = json::array();
  for (const auto& [m, c] : p.terms())
    terms.push_back({{"monomial", QPoly::monomial(p.dim(), m, 1).to_string()},
                     {"value", c.value},
                     {"std_error", c.error}});
  return terms;
}

py::object weight(const py::object& graph, std::int64_t samples, std::uint64_t seed, int jobs,
                  const std::string& cache_path) {
  AdmissibleGraph g = graph_from_json(from_py(graph));
  auto problems = validate(g);
  if (!problems.empty()) throw ValidationError(problems.front());
  json out;
  {
    py::gil_scoped_release nogil;
    WeightCache cache(cache_path);
    auto q = qmc(samples, seed, jobs);
    auto w = g.has_special() ? shoikhet_weight(g, q, &cache) : kontsevich_weight(g, q, &cache);
    if (!cache.path().empty()) cache.flush();
    out = {{"graph", graph_key(g)},  {"value", w.value}, {"std_error", w.std_error},
           {"samples", w.samples},   {"seed", w.seed},   {"exact", w.exact}};
  }
  return to_py(out);
}

py::object star(const py::object& poisson, const std::string& f, const std::string& g, int order,
                std::int64_t samples, std::uint64_t seed, int jobs, const std::string& cache_path) {
  QPolyVector pi = bivector_from_json(from_py(poisson));
  json out;
  {
    py::gil_scoped_release nogil;
    SuiteContext ctx(qmc(samples, seed, jobs), cache_path, order);
    auto s = star_product(pi, ctx.provider(), ctx.policy, ctx.calibration());
    auto r = star_apply(s, parse_poly(f, pi.dim()), parse_poly(g, pi.dim()));
    json series = json::array();
    for (std::size_t k = 0; k < r.c.size(); ++k)
      series.push_back({{"order", k}, {"text", r.c[k].to_string()}, {"terms", poly_json(r.c[k])}});
    ctx.flush();
    out = {{"f", f}, {"g", g}, {"jacobi", s.jacobi}, {"calibration", ctx.calibration().to_json()},
           {"series", series}};
  }
  return to_py(out);
}

py::object verify(const std::string& suite, const std::vector<std::string>& args, int order,
                  std::int64_t samples, std::uint64_t seed, double tol, int jobs, const std::string& cache_path) {
  json out;
  {
    py::gil_scoped_release nogil;
    SuiteContext ctx(qmc(samples, seed, jobs), cache_path, order, tol);
    auto r = run_suite(suite, ctx, args);
    ctx.flush();
    out = {{"suite", r.name}, {"pass", r.pass}, {"report", r.report}};
  }
  return to_py(out);
}

py::object duflo(const py::object& algebra, const std::string& element, int degree) {
  LieAlgebra L = py::isinstance<py::str>(algebra) && algebra.cast<std::string>().find('{') == std::string::npos
                     ? LieAlgebra::named(algebra.cast<std::string>())
                     : LieAlgebra::from_json(from_py(algebra));
  QPoly p = parse_poly(element, L.dim());
  if (degree < 0) degree = std::max(p.degree(), 2);
  UEA U(L);
  auto J = duflo_J(L, degree);
  auto d = duflo_map(U, J, p);
  return to_py({{"algebra", L.name()},
                {"element", element},
                {"degree", degree},
                {"J_half", J.J_half.to_string()},
                {"value", d.to_string()},
                {"exact", true}});
}

}  // namespace

PYBIND11_MODULE(_fkit, m) {
  m.doc() = "graph weights, star products and Duflo checks";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);

  m.def("weight", &weight, py::arg("graph"), py::arg("samples") = 1 << 18, py::arg("seed") = 1,
        py::arg("jobs") = 1, py::arg("cache") = "",
        "Weight of an admissible graph given as a dict or JSON text.");
  m.def("star", &star, py::arg("poisson"), py::arg("f"), py::arg("g"), py::arg("order") = 2,
        py::arg("samples") = 1 << 18, py::arg("seed") = 1, py::arg("jobs") = 1, py::arg("cache") = "",
        "Coefficients of f * g up to the given power of hbar.");
  m.def("verify", &verify, py::arg("suite"), py::arg("args") = std::vector<std::string>{}, py::arg("order") = 2,
        py::arg("samples") = 1 << 18, py::arg("seed") = 1, py::arg("tol") = 5e-2, py::arg("jobs") = 1,
        py::arg("cache") = "", "Runs a named verification suite.");
  m.def("duflo", &duflo, py::arg("algebra"), py::arg("element"), py::arg("degree") = -1,
        "Duflo image of a symmetric-algebra element, exactly.");
  m.def("suite_names", &suite_names);
  m.def("graph_key", [](const py::object& graph) { return graph_key(graph_from_json(from_py(graph))); });
  m.def("validate", [](const py::object& graph) { return validate(graph_from_json(from_py(graph))); });
}
