#include "fkit/integrate.hpp"

#include <boost/random/sobol.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <thread>

#include "fkit/errors.hpp"
#include "json.hpp"

namespace fkit {

// ---------------------------------------------------------------------------
// cache

WeightCache::WeightCache(std::string path) : path_(std::move(path)) {
  if (!path_.empty()) load(path_);
}

std::string WeightCache::default_path(const std::string& fallback) {
  if (const char* env = std::getenv("FKIT_CACHE"); env && *env) return env;
  return fallback;
}

std::string to_json_line(const GraphKey& key, const WeightEstimate& est) {
  nlohmann::json j{{"key", key},           {"value", est.value}, {"stderr", est.std_error},
                   {"samples", est.samples}, {"seed", est.seed},   {"exact", est.exact}};
  return j.dump();
}

void WeightCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      WeightEstimate est;
      std::string key = j.at("key").get<std::string>();
      est.value = j.at("value").get<double>();
      est.std_error = j.at("stderr").get<double>();
      est.samples = j.at("samples").get<std::int64_t>();
      est.seed = j.at("seed").get<std::uint64_t>();
      est.exact = j.at("exact").get<bool>();
      auto it = entries_.find(key);
      if (it == entries_.end() || est.samples > it->second.samples) entries_[key] = est;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("weight cache " + path + ": corrupt record at line " +
                       std::to_string(lineno) + " (" + e.what() + ")");
    }
  }
}

std::optional<WeightEstimate> WeightCache::get(const GraphKey& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool WeightCache::put(const GraphKey& key, const WeightEstimate& est) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it != entries_.end() && est.samples <= it->second.samples) return false;
  entries_[key] = est;
  pending_.emplace_back(key, est);
  return true;
}

void WeightCache::flush(const std::string& path) {
  std::lock_guard lock(mu_);
  const std::string& target = path.empty() ? path_ : path;
  if (!target.empty() && !pending_.empty()) {
    std::ofstream out(target, std::ios::app);
    if (!out) throw std::runtime_error("weight cache: cannot open " + target);
    for (const auto& [k, e] : pending_) out << to_json_line(k, e) << '\n';
    if (!out) throw std::runtime_error("weight cache: write failed for " + target);
  }
  pending_.clear();
}

std::size_t WeightCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// sampling

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double small_det(double* a, int n) {
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    double d = a[c * n + c];
    det *= d;
    for (int r = c + 1; r < n; ++r) {
      double f = a[r * n + c] / d;
      if (f == 0.0) continue;
      for (int k = c + 1; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

constexpr std::int64_t kMinBatches = 32;

// Batch size is a power of two no larger than the requested one, small
// enough for kMinBatches batches so the jackknife error has enough degrees
// of freedom.
std::pair<std::int64_t, std::int64_t> batch_layout(const QmcOptions& opts) {
  std::int64_t batch = 2;
  while (batch * 2 <= std::max<std::int64_t>(opts.batch, 2) && batch * 2 * kMinBatches <= opts.samples) batch *= 2;
  std::int64_t batches = std::max<std::int64_t>(kMinBatches, (opts.samples + batch - 1) / batch);
  return {batch, batches};
}

struct PassResult {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::int64_t samples = 0;
  std::int64_t rejected = 0;
};

using Evaluator = std::function<void(const std::vector<double>&, double*)>;

// Randomly shifted Sobol batches; the jackknife over batch means gives the
// standard error. Results do not depend on the number of workers.
PassResult qmc_pass(int dim, int count, const QmcOptions& opts, const Evaluator& eval) {
  if (opts.samples <= 0) throw CapacityError("sample budget must be positive");
  const auto [batch, batches] = batch_layout(opts);
  if (batches * batch > (std::int64_t{1} << 34)) throw CapacityError("sample budget too large");

  std::vector<std::uint64_t> net(static_cast<std::size_t>(batch * dim));
  if (dim > 0) {
    boost::random::sobol engine(dim);
    for (auto& x : net) x = engine();
  }

  std::vector<double> sums(static_cast<std::size_t>(batches * count), 0.0);
  std::vector<std::int64_t> rejected(static_cast<std::size_t>(batches), 0);
  int jobs = opts.jobs > 0 ? opts.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(batches)));

  auto work = [&](int worker) {
    std::vector<double> u(static_cast<std::size_t>(dim));
    std::vector<double> val(static_cast<std::size_t>(count));
    std::vector<std::uint64_t> shift(static_cast<std::size_t>(dim));
    for (std::int64_t b = worker; b < batches; b += jobs) {
      std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                        static_cast<std::uint32_t>(b), 0x5eedu};
      std::mt19937_64 rng(seq);
      for (auto& s : shift) s = rng();
      double* acc = &sums[static_cast<std::size_t>(b * count)];
      for (std::int64_t i = 0; i < batch; ++i) {
        for (int k = 0; k < dim; ++k) {
          std::uint64_t x = net[static_cast<std::size_t>(i * dim + k)] ^ shift[k];
          u[k] = (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
        }
        try {
          eval(u, val.data());
        } catch (const DegenerateConfiguration&) {
          ++rejected[b];
          continue;
        }
        for (int g = 0; g < count; ++g) acc[g] += val[g];
      }
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  PassResult res;
  res.samples = batches * batch;
  for (auto r : rejected) res.rejected += r;
  res.mean.assign(count, 0.0);
  res.std_error.assign(count, 0.0);
  const double B = static_cast<double>(batches);
  for (int g = 0; g < count; ++g) {
    double total = 0.0;
    for (std::int64_t b = 0; b < batches; ++b) total += sums[b * count + g] / batch;
    double mean = total / B;
    double ss = 0.0;
    for (std::int64_t b = 0; b < batches; ++b) {
      double loo = (total - sums[b * count + g] / batch) / (B - 1);
      ss += (loo - mean) * (loo - mean);
    }
    res.mean[g] = mean;
    res.std_error[g] = std::sqrt(ss * (B - 1) / B);
  }
  return res;
}

GaugeChart chart_for(const AdmissibleGraph& g) {
  return gauge_chart(g.has_special() ? Space::D : Space::C, g.n(), g.m());
}

// Evaluates the top forms of a family of same-type graphs, sharing edge rows.
class FamilyIntegrand {
 public:
  FamilyIntegrand(const std::vector<AdmissibleGraph>& graphs, const GaugeChart& chart)
      : graphs_(graphs), chart_(chart) {
    for (const auto& g : graphs_) {
      std::vector<int> ids;
      for (const auto& e : g.edges()) {
        auto it = std::find(edges_.begin(), edges_.end(), e);
        if (it == edges_.end()) {
          edges_.push_back(e);
          ids.push_back(static_cast<int>(edges_.size()) - 1);
        } else {
          ids.push_back(static_cast<int>(it - edges_.begin()));
        }
      }
      edge_ids_.push_back(std::move(ids));
      scale_.push_back(chart.orientation / std::pow(kTwoPi, static_cast<double>(g.edge_count())));
    }
  }

  void operator()(const std::vector<double>& u, double* out) const {
    evaluate(embed(chart_, u), out);
  }

  void evaluate(const Embedding& emb, double* out) const {
    const int dim = chart_.dim;
    std::vector<double> rows(edges_.size() * dim);
    std::vector<char> nonzero(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e)
      nonzero[e] = edge_form_row(graphs_.front(), edges_[e], emb, &rows[e * dim]);
    std::vector<double> mat(static_cast<std::size_t>(dim * dim));
    for (std::size_t g = 0; g < graphs_.size(); ++g) {
      out[g] = 0.0;
      bool zero = false;
      for (int r = 0; r < dim; ++r) {
        int e = edge_ids_[g][r];
        if (!nonzero[e]) {
          zero = true;
          break;
        }
        std::copy_n(&rows[e * dim], dim, &mat[r * dim]);
      }
      if (!zero) out[g] = scale_[g] * small_det(mat.data(), dim);
    }
  }

 private:
  std::vector<AdmissibleGraph> graphs_;
  GaugeChart chart_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> edge_ids_;
  std::vector<double> scale_;
};

std::int64_t effective_samples(const QmcOptions& opts) {
  const auto [batch, batches] = batch_layout(opts);
  return batch * batches;
}

}  // namespace

int weight_dimension(const AdmissibleGraph& g) {
  return g.has_special() ? 2 * g.n() + g.m() - 1 : 2 * g.n() + g.m() - 2;
}

std::optional<WeightEstimate> exact_weight(const AdmissibleGraph& g) {
  WeightEstimate zero;
  zero.exact = true;
  if (static_cast<int>(g.edge_count()) != weight_dimension(g)) return zero;
  if (g.has_special())
    for (const auto& e : g.edges())
      if (shoikhet_zero_edge(e)) return zero;
  if (weight_dimension(g) == 0) {
    WeightEstimate one = zero;
    one.value = 1.0;
    return one;
  }
  return std::nullopt;
}

double integrand(const AdmissibleGraph& g, const GaugeChart& chart, const std::vector<double>& u) {
  if ((chart.space == Space::D) != g.has_special() || chart.n != g.n() || chart.m != g.m())
    throw ValidationError("integrand: chart does not match the graph type");
  if (static_cast<int>(g.edge_count()) != chart.dim)
    throw ValidationError("integrand: edge count differs from the chart dimension");
  double out = 0.0;
  FamilyIntegrand({g}, chart)(u, &out);
  return out;
}

std::vector<WeightEstimate> weights(const std::vector<AdmissibleGraph>& graphs,
                                    const QmcOptions& opts, WeightCache* cache) {
  std::vector<WeightEstimate> out(graphs.size());
  const std::int64_t need = effective_samples(opts);
  std::map<std::tuple<bool, int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    if (auto ex = exact_weight(g)) {
      out[i] = *ex;
      continue;
    }
    if (cache) {
      if (auto hit = cache->get(graph_key(g)); hit && (hit->exact || hit->samples >= need)) {
        out[i] = *hit;
        continue;
      }
    }
    groups[{g.has_special(), g.n(), g.m()}].push_back(i);
  }
  for (const auto& [type, idx] : groups) {
    std::vector<AdmissibleGraph> family;
    for (auto i : idx) family.push_back(graphs[i]);
    auto chart = chart_for(family.front());
    FamilyIntegrand f(family, chart);
    auto res = qmc_pass(chart.dim, static_cast<int>(family.size()), opts,
                        [&](const std::vector<double>& u, double* v) { f(u, v); });
    for (std::size_t k = 0; k < idx.size(); ++k) {
      WeightEstimate est;
      est.value = res.mean[k];
      est.std_error = res.std_error[k];
      est.samples = res.samples;
      est.seed = opts.seed;
      est.rejected = res.rejected;
      out[idx[k]] = est;
      if (cache) cache->put(graph_key(family[k]), est);
    }
  }
  return out;
}

WeightEstimate kontsevich_weight(const AdmissibleGraph& g, const QmcOptions& opts,
                                 WeightCache* cache) {
  if (g.has_special()) throw ValidationError("kontsevich_weight: graph has a special vertex");
  if (auto v = validate(g, {true}); !v.empty())
    throw ValidationError("kontsevich_weight: " + v.front());
  return weights({g}, opts, cache).front();
}

WeightEstimate shoikhet_weight(const AdmissibleGraph& g, const QmcOptions& opts,
                               WeightCache* cache) {
  if (!g.has_special()) throw ValidationError("shoikhet_weight: graph has no special vertex");
  if (auto v = validate(g, {true}); !v.empty())
    throw ValidationError("shoikhet_weight: " + v.front());
  return weights({g}, opts, cache).front();
}

// ---------------------------------------------------------------------------
// stratum near the origin

namespace {

void check_stratum_graph(const AdmissibleGraph& g) {
  if (!g.has_special() || g.m() != 1 || g.n() < 1)
    throw ValidationError("stratum: graph must lie in G_{n,1,0} with n >= 1");
  if (!g.star(VertexRef::first(1)).empty())
    throw ValidationError("stratum: First(1) must have valence 0");
}

Embedding insert_origin_point(const Embedding& base, double eps, double theta0) {
  Embedding emb;
  emb.dim = base.dim;
  emb.n = base.n + 1;
  emb.m = base.m;
  emb.special = true;
  Complex z = mobius_psi_inv(std::polar(eps, theta0));
  emb.pos.push_back(z);
  emb.at_infinity.push_back(0);
  emb.deriv.assign(static_cast<std::size_t>(base.dim), Complex{});
  emb.pos.insert(emb.pos.end(), base.pos.begin(), base.pos.end());
  emb.at_infinity.insert(emb.at_infinity.end(), base.at_infinity.begin(), base.at_infinity.end());
  emb.deriv.insert(emb.deriv.end(), base.deriv.begin(), base.deriv.end());
  for (std::size_t k = 1; k < emb.pos.size(); ++k)
    if (std::abs(emb.pos[k] - z) < 1e-14) throw DegenerateConfiguration("stratum: coincidence");
  return emb;
}

double stratum_integrand(const AdmissibleGraph& g, const GaugeChart& chart0,
                         const std::vector<double>& u, double eps, double theta0) {
  auto emb = insert_origin_point(embed(chart0, u), eps, theta0);
  const int dim = chart0.dim;
  std::vector<double> mat(static_cast<std::size_t>(dim * dim));
  auto edges = g.edges();
  for (int r = 0; r < dim; ++r)
    if (!edge_form_row(g, edges[r], emb, &mat[r * dim])) return 0.0;
  return chart0.orientation * small_det(mat.data(), dim) /
         std::pow(kTwoPi, static_cast<double>(dim));
}

}  // namespace

AdmissibleGraph origin_collapse(const AdmissibleGraph& g) {
  check_stratum_graph(g);
  return collapse(g, {VertexRef::special(), VertexRef::first(1)}, VertexRef::special(), {true});
}

WeightEstimate stratum_weight_origin(const AdmissibleGraph& g, const QmcOptions& opts, double eps,
                                     double theta0) {
  check_stratum_graph(g);
  WeightEstimate zero;
  zero.exact = true;
  const int dim = 2 * (g.n() - 1) + g.m() - 1;
  if (static_cast<int>(g.edge_count()) != dim) return zero;
  for (const auto& e : g.edges())
    if (shoikhet_zero_edge(e) || (e.source.is_special() && e.target == VertexRef::first(1)))
      return zero;
  auto chart0 = gauge_chart(Space::D, g.n() - 1, g.m());
  if (dim == 0) {
    zero.value = 1.0;
    return zero;
  }
  auto res = qmc_pass(dim, 1, opts, [&](const std::vector<double>& u, double* v) {
    v[0] = stratum_integrand(g, chart0, u, eps, theta0);
  });
  WeightEstimate est;
  est.value = res.mean[0];
  est.std_error = res.std_error[0];
  est.samples = res.samples;
  est.seed = opts.seed;
  est.rejected = res.rejected;
  return est;
}

double pointwise_collapse_check(const AdmissibleGraph& g, const std::vector<double>& u, double eps,
                                double theta0) {
  auto g0 = origin_collapse(g);
  auto chart0 = gauge_chart(Space::D, g0.n(), g0.m());
  if (static_cast<int>(g.edge_count()) != chart0.dim)
    throw ValidationError("pointwise_collapse_check: edge count differs from the stratum dimension");
  double a = stratum_integrand(g, chart0, u, eps, theta0);
  double b = 0.0;
  if (static_cast<int>(g0.edge_count()) == chart0.dim) {
    std::vector<double> mat(static_cast<std::size_t>(chart0.dim * chart0.dim));
    auto emb = embed(chart0, u);
    auto edges = g0.edges();
    bool zero = false;
    for (int r = 0; r < chart0.dim && !zero; ++r)
      zero = !edge_form_row(g0, edges[r], emb, &mat[r * chart0.dim]);
    if (!zero)
      b = chart0.orientation * small_det(mat.data(), chart0.dim) /
          std::pow(kTwoPi, static_cast<double>(chart0.dim));
  }
  return std::abs(a - b);
}

std::vector<WeightEstimate> QmcWeightProvider::weights(const std::vector<AdmissibleGraph>& graphs) {
  std::vector<WeightEstimate> out(graphs.size());
  std::vector<AdmissibleGraph> missing;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    auto key = graph_key(graphs[i]);
    if (auto it = memo_.find(key); it != memo_.end()) {
      out[i] = it->second;
    } else {
      missing.push_back(graphs[i]);
      where.push_back(i);
    }
  }
  if (!missing.empty()) {
    auto w = fkit::weights(missing, opts_, cache_);
    for (std::size_t k = 0; k < missing.size(); ++k) {
      out[where[k]] = w[k];
      memo_[graph_key(missing[k])] = w[k];
    }
  }
  return out;
}

}  // namespace fkit
