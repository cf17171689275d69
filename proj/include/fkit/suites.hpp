#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fkit/duflo.hpp"
#include "fkit/formality.hpp"
#include "fkit/integrate.hpp"
#include "json.hpp"

namespace fkit {

/// Shared state for verification suites: sampling options, the weight cache,
/// and the one-time calibration.
class SuiteContext {
 public:
  SuiteContext(QmcOptions qmc, std::string cache_path, int order = 2, double tolerance = 5e-2);
  ~SuiteContext();

  QmcOptions qmc;
  TruncationPolicy policy;

  WeightCache& cache() { return *cache_; }
  WeightProvider& provider() { return *provider_; }
  /// Loaded from (or written to) the calibration file next to the cache.
  const Calibration& calibration();
  void set_calibration(const Calibration& cal) { cal_ = cal; }
  std::string calibration_path() const;
  void flush();

 private:
  std::string cache_path_;
  std::unique_ptr<WeightCache> cache_;
  std::unique_ptr<QmcWeightProvider> provider_;
  std::optional<Calibration> cal_;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::json report;
};

/// Coefficient-wise bound |c| <= max(floor, k * error) over polynomials.
struct CoefficientCheck {
  double floor = 0.0;
  double k = 4.0;
  int checked = 0;
  int failures = 0;
  double max_abs = 0.0;
  double max_error = 0.0;

  void add(const APoly& p);
  void add(const AOp& op);
  void add(const AForm& w);
  bool pass() const { return failures == 0; }
  nlohmann::json to_json() const;
};

SuiteResult suite_degree_filter(SuiteContext& ctx);
SuiteResult suite_wedge(SuiteContext& ctx);
SuiteResult suite_hkr(SuiteContext& ctx);
SuiteResult suite_commutator(SuiteContext& ctx);
SuiteResult suite_assoc(SuiteContext& ctx);
SuiteResult suite_wheels(SuiteContext& ctx);
SuiteResult suite_strata(SuiteContext& ctx);
SuiteResult suite_lemmas(SuiteContext& ctx);
SuiteResult suite_cap(SuiteContext& ctx);
/// Exact Duflo checks; an empty name runs sl2, heisenberg and abelian.
SuiteResult suite_duflo(const std::string& algebra = "", int degree = 4);

/// Names accepted by run_suite.
std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, SuiteContext& ctx, const std::vector<std::string>& args = {});

/// The bivector of sl2 from kks_bivector and the constant bivector d1^d2.
QPolyVector sl2_bivector();
QPolyVector constant_bivector();

/// Test graphs for the stratum identity and the pointwise decay check.
std::vector<AdmissibleGraph> stratum_test_graphs();
AdmissibleGraph stratum_decay_graph();
AdmissibleGraph wheel_graph(int spokes);

}  // namespace fkit
