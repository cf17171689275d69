#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fkit/geometry.hpp"
#include "fkit/graphs.hpp"

namespace fkit {

struct WeightEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  bool exact = false;
  /// Chart points dropped as near-coincident (not persisted).
  std::int64_t rejected = 0;
};

struct QmcOptions {
  std::int64_t samples = 1 << 20;
  std::uint64_t seed = 1;
  std::int64_t batch = 1 << 14;
  int jobs = 1;
};

/// Line-delimited JSON store of weight estimates keyed by GraphKey.
class WeightCache {
 public:
  WeightCache() = default;
  /// Loads `path` if it exists; later writes append to it.
  explicit WeightCache(std::string path);

  /// Path from FKIT_CACHE, else `fallback` (may be empty for memory only).
  static std::string default_path(const std::string& fallback = "");

  std::optional<WeightEstimate> get(const GraphKey& key) const;
  /// Keeps the entry with more samples; returns true if stored.
  bool put(const GraphKey& key, const WeightEstimate& est);
  /// Appends pending records to `path` (the constructor path when empty).
  void flush(const std::string& path = "");
  std::size_t size() const;
  const std::string& path() const { return path_; }

 private:
  void load(const std::string& path);

  std::string path_;
  mutable std::mutex mu_;
  std::map<GraphKey, WeightEstimate> entries_;
  std::vector<std::pair<GraphKey, WeightEstimate>> pending_;
};

std::string to_json_line(const GraphKey& key, const WeightEstimate& est);

/// Dimension of the configuration space the graph is integrated over.
int weight_dimension(const AdmissibleGraph& g);

/// Exact weight when no integration is needed (degree mismatch, a zero edge
/// form, or a zero-dimensional space).
std::optional<WeightEstimate> exact_weight(const AdmissibleGraph& g);

/// Top form of the graph against d/du_1..d/du_dim at chart point u, divided by
/// (2 pi)^|E| and signed by the chart orientation.
double integrand(const AdmissibleGraph& g, const GaugeChart& chart, const std::vector<double>& u);

WeightEstimate kontsevich_weight(const AdmissibleGraph& g, const QmcOptions& opts,
                                 WeightCache* cache = nullptr);
WeightEstimate shoikhet_weight(const AdmissibleGraph& g, const QmcOptions& opts,
                               WeightCache* cache = nullptr);

/// Weights of several graphs of the same type from one sampling pass. Graphs
/// of other types are split off into their own passes.
std::vector<WeightEstimate> weights(const std::vector<AdmissibleGraph>& graphs,
                                    const QmcOptions& opts, WeightCache* cache = nullptr);

/// Weight over the stratum where First(1) sits at eps * e^{i theta0} next to
/// the special vertex: g in G_{n,1,0} with First(1) of valence 0.
WeightEstimate stratum_weight_origin(const AdmissibleGraph& g, const QmcOptions& opts,
                                     double eps = 1e-7, double theta0 = 0.7);

/// |integrand of g with First(1) at eps e^{i theta0} - integrand of the
/// collapsed graph| at chart point u of the collapsed graph's chart.
double pointwise_collapse_check(const AdmissibleGraph& g, const std::vector<double>& u,
                                double eps, double theta0 = 0.7);

/// The collapsed graph collapse(g, {0, First(1)}, 0).
AdmissibleGraph origin_collapse(const AdmissibleGraph& g);

/// Supplies weights to the formality layer; the QMC provider caches per key.
class WeightProvider {
 public:
  virtual ~WeightProvider() = default;
  /// Weights for a list of graphs, in order.
  virtual std::vector<WeightEstimate> weights(const std::vector<AdmissibleGraph>& graphs) = 0;
};

class QmcWeightProvider : public WeightProvider {
 public:
  explicit QmcWeightProvider(QmcOptions opts, WeightCache* cache = nullptr)
      : opts_(opts), cache_(cache) {}
  std::vector<WeightEstimate> weights(const std::vector<AdmissibleGraph>& graphs) override;
  const QmcOptions& options() const { return opts_; }

 private:
  QmcOptions opts_;
  WeightCache* cache_;
  std::map<GraphKey, WeightEstimate> memo_;
};

}  // namespace fkit
