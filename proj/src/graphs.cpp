#include "fkit/graphs.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "fkit/errors.hpp"

namespace fkit {

std::string VertexRef::to_string() const {
  switch (kind) {
    case Kind::First:
      return "v" + std::to_string(index);
    case Kind::Second:
      return "b" + std::to_string(index);
    case Kind::Special:
      return "0";
  }
  return "?";
}

VertexRef VertexRef::parse(const std::string& s) {
  if (s == "0") return special();
  if (s.size() < 2 || (s[0] != 'v' && s[0] != 'b'))
    throw ParseError("bad vertex reference '" + s + "'");
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(s.substr(1), &used);
    if (used != s.size() - 1) throw ParseError("bad vertex reference '" + s + "'");
  } catch (const std::logic_error&) {
    throw ParseError("bad vertex reference '" + s + "'");
  }
  if (k < 1) throw ParseError("vertex labels start at 1: '" + s + "'");
  return s[0] == 'v' ? first(k) : second(k);
}

AdmissibleGraph::AdmissibleGraph(int n, int m, bool has_special,
                                 std::vector<std::vector<VertexRef>> stars)
    : n_(n), m_(m), has_special_(has_special), stars_(std::move(stars)) {
  if (n < 0 || m < 0) throw ValidationError("graph type (n,m) must be non-negative");
  if (stars_.size() != static_cast<std::size_t>(n + (has_special ? 1 : 0)))
    throw ValidationError("number of stars does not match the emitting vertices");
}

const std::vector<VertexRef>& AdmissibleGraph::star(const VertexRef& v) const {
  if (v.is_first() && v.index >= 1 && v.index <= n_) return stars_[v.index - 1];
  if (v.is_special() && has_special_) return stars_[n_];
  throw ValidationError("vertex " + v.to_string() + " does not emit edges");
}

std::vector<VertexRef> AdmissibleGraph::emitters() const {
  std::vector<VertexRef> out;
  for (int k = 1; k <= n_; ++k) out.push_back(VertexRef::first(k));
  if (has_special_) out.push_back(VertexRef::special());
  return out;
}

std::vector<Edge> AdmissibleGraph::edges() const {
  std::vector<Edge> out;
  auto em = emitters();
  for (std::size_t i = 0; i < em.size(); ++i)
    for (const auto& t : stars_[i]) out.push_back({em[i], t});
  return out;
}

std::size_t AdmissibleGraph::edge_count() const {
  std::size_t c = 0;
  for (const auto& s : stars_) c += s.size();
  return c;
}

bool AdmissibleGraph::contains(const VertexRef& v) const {
  switch (v.kind) {
    case VertexRef::Kind::First:
      return v.index >= 1 && v.index <= n_;
    case VertexRef::Kind::Second:
      return v.index >= 1 && v.index <= m_;
    case VertexRef::Kind::Special:
      return has_special_;
  }
  return false;
}

bool operator<(const AdmissibleGraph& a, const AdmissibleGraph& b) {
  return std::tie(a.has_special_, a.n_, a.m_, a.stars_) <
         std::tie(b.has_special_, b.n_, b.m_, b.stars_);
}

GraphKey graph_key(const AdmissibleGraph& g) {
  std::string key = g.has_special() ? "S" : "K";
  key += std::to_string(g.n()) + "," + std::to_string(g.m()) + ":";
  for (std::size_t i = 0; i < g.stars().size(); ++i) {
    if (i) key += "|";
    const auto& s = g.stars()[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j) key += ".";
      key += s[j].to_string();
    }
  }
  return key;
}

namespace {

bool type_ok(int n, int m, bool special) {
  if (n < 0 || m < 0) return false;
  return special ? (m >= 1 && 2 * n + m - 1 >= 0) : (2 * n + m - 2 >= 0);
}

}  // namespace

std::vector<std::string> validate(const AdmissibleGraph& g, const GraphOptions& opts) {
  std::vector<std::string> out;
  if (!type_ok(g.n(), g.m(), g.has_special())) out.emplace_back("invalid type");
  std::map<std::pair<VertexRef, VertexRef>, int> seen;
  bool dup = false;
  bool self = false;
  bool range = false;
  for (const auto& e : g.edges()) {
    if (!g.contains(e.target)) {
      range = true;
      continue;
    }
    if (e.source == e.target) {
      self = true;
      continue;
    }
    std::pair<VertexRef, VertexRef> key{e.source, e.target};
    if (!opts.ordered_pair_edges && key.second < key.first) std::swap(key.first, key.second);
    if (++seen[key] > 1) dup = true;
  }
  if (range) out.emplace_back("target out of range");
  if (self) out.emplace_back("self-edge");
  if (dup) out.emplace_back("duplicate edge");
  return out;
}

namespace detail {

/// Depth-first enumeration over edge slots. Leaves are written into one
/// reusable graph; the visitor sees it by reference.
class GraphEnumerator {
 public:
  GraphEnumerator(int n, int m, bool special, const std::vector<int>& valences, int special_valence,
                  const GraphOptions& opts)
      : opts_(opts), graph_(n, m, special, std::vector<std::vector<VertexRef>>(n + (special ? 1 : 0))) {
    nv_ = n + m + (special ? 1 : 0);
    for (int k = 1; k <= n; ++k) all_.push_back(VertexRef::first(k));
    for (int k = 1; k <= m; ++k) all_.push_back(VertexRef::second(k));
    if (special) all_.push_back(VertexRef::special());
    for (int k = 0; k < n; ++k)
      for (int s = 0; s < valences[k]; ++s) slots_.push_back(k);
    if (special)
      for (int s = 0; s < special_valence; ++s) slots_.push_back(n + m);
    emit_index_.resize(nv_, -1);
    for (int k = 0; k < n; ++k) emit_index_[k] = k;
    if (special) emit_index_[n + m] = n;
    adj_.assign(static_cast<std::size_t>(nv_ * nv_), 0);
    for (auto& s : graph_.stars_) s.reserve(static_cast<std::size_t>(nv_));
  }

  std::size_t run(const std::function<bool(const AdmissibleGraph&)>& visit) {
    visit_ = &visit;
    recurse(0);
    return count_;
  }

 private:
  bool recurse(std::size_t slot) {
    if (slot == slots_.size()) {
      ++count_;
      return (*visit_)(graph_);
    }
    int src = slots_[slot];
    auto& star = graph_.stars_[emit_index_[src]];
    for (int t = 0; t < nv_; ++t) {
      if (t == src) continue;
      if (adj_[src * nv_ + t]) continue;
      if (!opts_.ordered_pair_edges && adj_[t * nv_ + src]) continue;
      adj_[src * nv_ + t] = 1;
      star.push_back(all_[t]);
      bool go = recurse(slot + 1);
      star.pop_back();
      adj_[src * nv_ + t] = 0;
      if (!go) return false;
    }
    return true;
  }

  GraphOptions opts_;
  AdmissibleGraph graph_;
  int nv_ = 0;
  std::vector<VertexRef> all_;
  std::vector<int> slots_;
  std::vector<int> emit_index_;
  std::vector<char> adj_;
  const std::function<bool(const AdmissibleGraph&)>* visit_ = nullptr;
  std::size_t count_ = 0;
};

}  // namespace detail

namespace {

std::vector<AdmissibleGraph> collect(detail::GraphEnumerator e, const GraphOptions& opts) {
  std::vector<AdmissibleGraph> out;
  e.run([&](const AdmissibleGraph& g) {
    if (out.size() >= opts.max_graphs)
      throw CapacityError("graph enumeration exceeds capacity " + std::to_string(opts.max_graphs));
    out.push_back(g);
    return true;
  });
  return out;
}

void check_kontsevich(int n, int m, const std::vector<int>& valences) {
  if (n < 0 || m < 0 || 2 * n + m - 2 < 0)
    throw ValidationError("enumerate_kontsevich: need n,m >= 0 and 2n+m-2 >= 0");
  if (valences.size() != static_cast<std::size_t>(n))
    throw ValidationError("enumerate_kontsevich: expected one valence per first-type vertex");
  for (int v : valences)
    if (v < 0) throw ValidationError("enumerate_kontsevich: negative valence");
}

void check_shoikhet(int n, int m, int special_valence, const std::vector<int>& valences) {
  if (n < 0 || m < 1 || 2 * n + m - 1 < 0)
    throw ValidationError("enumerate_shoikhet: need n >= 0, m >= 1");
  if (valences.size() != static_cast<std::size_t>(n))
    throw ValidationError("enumerate_shoikhet: expected one valence per first-type vertex");
  if (special_valence < 0) throw ValidationError("enumerate_shoikhet: negative valence");
  for (int v : valences)
    if (v < 0) throw ValidationError("enumerate_shoikhet: negative valence");
}


}  // namespace

std::vector<AdmissibleGraph> enumerate_kontsevich(int n, int m, const std::vector<int>& valences,
                                                  const GraphOptions& opts) {
  check_kontsevich(n, m, valences);
  return collect(detail::GraphEnumerator(n, m, false, valences, 0, opts), opts);
}

std::vector<AdmissibleGraph> enumerate_shoikhet(int n, int m, int special_valence,
                                                const std::vector<int>& valences,
                                                const GraphOptions& opts) {
  check_shoikhet(n, m, special_valence, valences);
  return collect(detail::GraphEnumerator(n, m, true, valences, special_valence, opts), opts);
}

std::size_t visit_kontsevich(int n, int m, const std::vector<int>& valences, const GraphOptions& opts,
                             const std::function<bool(const AdmissibleGraph&)>& visit) {
  check_kontsevich(n, m, valences);
  return detail::GraphEnumerator(n, m, false, valences, 0, opts).run(visit);
}

std::size_t visit_shoikhet(int n, int m, int special_valence, const std::vector<int>& valences,
                           const GraphOptions& opts,
                           const std::function<bool(const AdmissibleGraph&)>& visit) {
  check_shoikhet(n, m, special_valence, valences);
  return detail::GraphEnumerator(n, m, true, valences, special_valence, opts).run(visit);
}

AdmissibleGraph collapse(const AdmissibleGraph& g, const std::vector<VertexRef>& cluster,
                         const VertexRef& new_vertex, const GraphOptions& opts) {
  if (cluster.empty()) throw ValidationError("collapse: empty cluster");
  auto in_cluster = [&](const VertexRef& v) {
    return std::find(cluster.begin(), cluster.end(), v) != cluster.end();
  };
  for (const auto& v : cluster)
    if (!g.contains(v)) throw ValidationError("collapse: " + v.to_string() + " not in graph");
  if (!in_cluster(new_vertex)) throw ValidationError("collapse: new vertex must belong to cluster");

  // Relabel survivors.
  std::map<VertexRef, VertexRef> relabel;
  int nf = 0;
  for (int k = 1; k <= g.n(); ++k) {
    auto v = VertexRef::first(k);
    if (in_cluster(v) && v != new_vertex) continue;
    relabel[v] = VertexRef::first(++nf);
  }
  int ns = 0;
  for (int k = 1; k <= g.m(); ++k) {
    auto v = VertexRef::second(k);
    if (in_cluster(v) && v != new_vertex) continue;
    relabel[v] = VertexRef::second(++ns);
  }
  bool special = g.has_special() && (!in_cluster(VertexRef::special()) || new_vertex.is_special());
  if (special) relabel[VertexRef::special()] = VertexRef::special();
  const VertexRef merged = relabel.at(new_vertex);
  for (const auto& v : cluster) relabel[v] = merged;

  std::vector<std::vector<VertexRef>> stars(static_cast<std::size_t>(nf + (special ? 1 : 0)));
  auto slot_of = [&](const VertexRef& v) -> std::size_t {
    return v.is_special() ? static_cast<std::size_t>(nf) : static_cast<std::size_t>(v.index - 1);
  };
  for (const auto& src : g.emitters()) {
    VertexRef s = relabel.at(src);
    for (const auto& t : g.star(src)) {
      VertexRef tt = relabel.at(t);
      if (tt == s) continue;  // internal to the cluster
      if (s.is_second())
        throw ValidationError("collapse: merged second-type vertex would emit an edge");
      stars[slot_of(s)].push_back(tt);
    }
  }
  AdmissibleGraph out(nf, ns, special, std::move(stars));
  for (const auto& v : validate(out, opts))
    if (v == "duplicate edge") throw ValidationError("collapse creates duplicate edge");
  return out;
}

int permutation_sign(const std::vector<int>& p) {
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) sign = -sign;
  return sign;
}

namespace {

void check_permutation(const std::vector<int>& p, std::size_t size) {
  if (p.size() != size) throw ValidationError("edge permutation length mismatch");
  std::vector<char> hit(size, 0);
  for (int x : p) {
    if (x < 0 || static_cast<std::size_t>(x) >= size || hit[x])
      throw ValidationError("not a permutation of the edge list");
    hit[x] = 1;
  }
}

}  // namespace

int edge_order_sign(const AdmissibleGraph& g, const std::vector<int>& permutation) {
  check_permutation(permutation, g.edge_count());
  return permutation_sign(permutation);
}

AdmissibleGraph permute_edges(const AdmissibleGraph& g, const std::vector<int>& permutation) {
  check_permutation(permutation, g.edge_count());
  auto edges = g.edges();
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < g.stars().size(); ++i)
    for (std::size_t j = 0; j < g.stars()[i].size(); ++j) owner.push_back(i);
  auto stars = g.stars();
  std::size_t pos = 0;
  for (auto& s : stars)
    for (auto& t : s) {
      auto src = static_cast<std::size_t>(permutation[pos]);
      if (owner[src] != owner[pos])
        throw ValidationError("edge permutation must preserve stars");
      t = edges[src].target;
      ++pos;
    }
  return AdmissibleGraph(g.n(), g.m(), g.has_special(), std::move(stars));
}

nlohmann::json to_json(const AdmissibleGraph& g) {
  nlohmann::json stars = nlohmann::json::array();
  for (const auto& s : g.stars()) {
    nlohmann::json star = nlohmann::json::array();
    for (const auto& t : s) star.push_back(t.to_string());
    stars.push_back(star);
  }
  return {{"n", g.n()}, {"m", g.m()}, {"special", g.has_special()}, {"stars", stars}};
}

AdmissibleGraph graph_from_json(const nlohmann::json& j) {
  try {
    int n = j.at("n").get<int>();
    int m = j.at("m").get<int>();
    bool special = j.value("special", false);
    std::vector<std::vector<VertexRef>> stars;
    for (const auto& s : j.at("stars")) {
      std::vector<VertexRef> star;
      for (const auto& t : s) star.push_back(VertexRef::parse(t.get<std::string>()));
      stars.push_back(std::move(star));
    }
    // Graphs with no emitting edges may omit trailing empty stars.
    while (stars.size() < static_cast<std::size_t>(n + (special ? 1 : 0))) stars.emplace_back();
    return AdmissibleGraph(n, m, special, std::move(stars));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
}

}  // namespace fkit
