#pragma once

#include <string>
#include <vector>

#include "fkit/algebra.hpp"
#include "fkit/graphs.hpp"
#include "fkit/integrate.hpp"
#include "json.hpp"

namespace fkit {

using AOp = PolyDiffOp<Approx>;
using AField = PolyVectorField<Approx>;
using AForm = DiffForm<Approx>;
using AChain = HochschildChain<Approx>;
using AStar = StarAlgebra<Approx>;

struct TruncationPolicy {
  /// Highest power of hbar kept.
  int order = 2;
  /// Largest n+m of an enumerated graph.
  int max_graph_size = 8;
  double tolerance = 5e-2;
  GraphOptions graphs;
};

/// One weight used in an expansion, for reports.
struct WeightRecord {
  GraphKey key;
  WeightEstimate weight;
};
nlohmann::json to_json(const WeightRecord& r);

/// Operator U_Gamma(fields) of a Kontsevich graph; arity m.
QDiffOp u_gamma_operator(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields);
QPoly u_gamma_graph(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields,
                    const std::vector<QPoly>& args);

/// The |star(0)|-form S_Gamma(fields; a_0|...|a_{m-1}) of a Shoikhet graph, so
/// that pairing with an l-vector alpha gives U_Gamma(alpha, fields)(a...).
/// Graphs with an edge into the special vertex give zero.
QForm s_gamma_graph(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields,
                    const std::vector<QPoly>& chain);
QForm s_gamma_graph(const AdmissibleGraph& g, const std::vector<QPolyVector>& fields,
                    const QChain& chain);

/// sum over G_{n,m} of W_Gamma U_Gamma(fields), m fixed by the degree filter.
AOp taylor_U(const std::vector<QPolyVector>& fields, WeightProvider& weights,
             const TruncationPolicy& policy, std::vector<WeightRecord>* log = nullptr);
/// sum over G_{n,m,0} of W_{D,Gamma} S_Gamma(fields, c).
AForm taylor_S(const std::vector<QPolyVector>& fields, const AChain& chain, WeightProvider& weights,
               const TruncationPolicy& policy, std::vector<WeightRecord>* log = nullptr);

/// One global sign and one normalization constant for the bivector, fixed by
/// (x*y - y*x) at hbar^1 = 2 pi^{12} for constant pi on R^2.
struct Calibration {
  int sign = 1;
  Rational kappa = 1;
  /// Ratio observed before calibration.
  double measured = 1.0;
  double measured_error = 0.0;

  /// Factor applied to every input bivector.
  Rational scale() const { return 1 / (sign * kappa); }
  nlohmann::json to_json() const;
  static Calibration from_json(const nlohmann::json& j);
};

Calibration calibrate(WeightProvider& weights, const TruncationPolicy& policy);
/// Reads the calibration at `path`, or computes and writes it.
Calibration load_or_calibrate(const std::string& path, WeightProvider& weights,
                              const TruncationPolicy& policy);

struct StarProduct {
  AStar algebra;
  /// [pi, pi] == 0 exactly.
  bool jacobi = true;
  std::vector<WeightRecord> weights;
};

/// mu + sum_k hbar^k (1/k!) U_k(pi, ..., pi) with pi rescaled by the calibration.
StarProduct star_product(const QPolyVector& pi, WeightProvider& weights, const TruncationPolicy& policy,
                         const Calibration& cal = {});
HbarSeries<APoly> star_apply(const StarProduct& s, const QPoly& f, const QPoly& g);

/// sum_n hbar^n (1/n!) U_{n+1}(alpha, pi, ..., pi).
HbarSeries<AOp> tangent_U(const QPolyVector& pi, const QPolyVector& alpha, WeightProvider& weights,
                          const TruncationPolicy& policy, const Calibration& cal = {});
/// sum_n hbar^n (1/n!) S_n(pi, ..., pi, c).
HbarSeries<AForm> tangent_S(const QPolyVector& pi, const AChain& chain, WeightProvider& weights,
                            const TruncationPolicy& policy, const Calibration& cal = {});

struct CapOrder {
  int order = 0;
  double lhs_norm = 0, rhs_norm = 0, delta_norm = 0, delta_error = 0;
  /// Least-squares residual of delta = L_pi(eta) (plain norm of delta at hbar^0).
  double homotopy_residual = 0;
  /// Polynomial degree bound of the homotopy search space.
  int eta_degree = 0;
  double tolerance = 0;
  bool pass = false;
};

struct CapReport {
  std::vector<CapOrder> orders;
  HbarSeries<AForm> lhs, rhs, delta;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Compares alpha cap S(c) with S(U(alpha) cap c) order by order.
CapReport cap_report(const QPolyVector& alpha, const QChain& chain, const QPolyVector& pi,
                     WeightProvider& weights, const TruncationPolicy& policy, const Calibration& cal = {});

/// Least-squares residual (max norm) of delta = L_pi(eta) over eta with
/// polynomial coefficients of degree <= eta_degree.
double homotopy_residual(const AForm& delta, const QPolyVector& pi, int eta_degree);

/// Bivector from JSON {"dim":d,"pi":[[i,j,"poly"],...]} with 1-based i<j.
QPolyVector bivector_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QPolyVector& pi);

}  // namespace fkit
