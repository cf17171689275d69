#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fkit {

namespace detail {
class GraphEnumerator;
}

/// A vertex of an admissible graph. First/Second carry 1-based labels;
/// Special is the vertex 0 of Shoikhet graphs.
struct VertexRef {
  enum class Kind { First = 0, Second = 1, Special = 2 };
  Kind kind = Kind::First;
  int index = 0;

  static VertexRef first(int k) { return {Kind::First, k}; }
  static VertexRef second(int k) { return {Kind::Second, k}; }
  static VertexRef special() { return {Kind::Special, 0}; }

  bool is_first() const { return kind == Kind::First; }
  bool is_second() const { return kind == Kind::Second; }
  bool is_special() const { return kind == Kind::Special; }

  /// "v3", "b2" or "0".
  std::string to_string() const;
  static VertexRef parse(const std::string& s);

  friend auto operator<=>(const VertexRef&, const VertexRef&) = default;
};

struct Edge {
  VertexRef source;
  VertexRef target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Labeled directed graph of type (n, m), optionally with the special vertex.
/// stars[k-1] is the ordered star of First(k); when has_special, stars[n] is
/// the star of Special.
class AdmissibleGraph {
 public:
  AdmissibleGraph() = default;
  AdmissibleGraph(int n, int m, bool has_special, std::vector<std::vector<VertexRef>> stars);

  int n() const { return n_; }
  int m() const { return m_; }
  bool has_special() const { return has_special_; }
  const std::vector<std::vector<VertexRef>>& stars() const { return stars_; }

  /// Ordered star of an edge-emitting vertex (First(k) or Special).
  const std::vector<VertexRef>& star(const VertexRef& v) const;
  std::size_t valence(const VertexRef& v) const { return star(v).size(); }

  /// Edges in label order: star of First(1), ..., star of First(n), then Special.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  /// Vertices that may emit edges, in the same order as stars().
  std::vector<VertexRef> emitters() const;
  bool contains(const VertexRef& v) const;

  friend bool operator==(const AdmissibleGraph&, const AdmissibleGraph&) = default;
  friend bool operator<(const AdmissibleGraph& a, const AdmissibleGraph& b);

 private:
  friend class detail::GraphEnumerator;

  int n_ = 0;
  int m_ = 0;
  bool has_special_ = false;
  std::vector<std::vector<VertexRef>> stars_;
};

struct GraphOptions {
  /// Relaxes "at most one edge between two distinct vertices" from the
  /// unordered-pair reading to one edge per ordered pair.
  bool ordered_pair_edges = false;
  /// Enumeration capacity; exceeding it raises CapacityError.
  std::size_t max_graphs = 2'000'000;
};

/// Canonical string encoding; equal iff the graphs are equal.
using GraphKey = std::string;
GraphKey graph_key(const AdmissibleGraph& g);

/// Admissibility violations; empty iff admissible. Messages include
/// "self-edge", "duplicate edge", "target out of range", "invalid type".
std::vector<std::string> validate(const AdmissibleGraph& g, const GraphOptions& opts = {});

std::vector<AdmissibleGraph> enumerate_kontsevich(int n, int m, const std::vector<int>& valences,
                                                  const GraphOptions& opts = {});

std::vector<AdmissibleGraph> enumerate_shoikhet(int n, int m, int special_valence,
                                                const std::vector<int>& valences,
                                                const GraphOptions& opts = {});

/// Streams the same graphs as the enumerators without collecting them. The
/// visitor returns false to stop; returns the number of graphs visited.
std::size_t visit_kontsevich(int n, int m, const std::vector<int>& valences, const GraphOptions& opts,
                             const std::function<bool(const AdmissibleGraph&)>& visit);
std::size_t visit_shoikhet(int n, int m, int special_valence, const std::vector<int>& valences,
                           const GraphOptions& opts,
                           const std::function<bool(const AdmissibleGraph&)>& visit);

/// Identifies the cluster with `new_vertex` (a member of the cluster).
/// Edges inside the cluster are dropped; stars keep their order, merged stars
/// are concatenated in label order. Remaining vertices are relabeled
/// consecutively.
AdmissibleGraph collapse(const AdmissibleGraph& g, const std::vector<VertexRef>& cluster,
                         const VertexRef& new_vertex, const GraphOptions& opts = {});

/// Sign of a permutation of the concatenated edge list.
int edge_order_sign(const AdmissibleGraph& g, const std::vector<int>& permutation);

/// Sign of a permutation given as images of 0..k-1.
int permutation_sign(const std::vector<int>& permutation);

/// The graph whose concatenated edge list is `permutation` applied within
/// each star (the permutation must preserve stars).
AdmissibleGraph permute_edges(const AdmissibleGraph& g, const std::vector<int>& permutation);

nlohmann::json to_json(const AdmissibleGraph& g);
AdmissibleGraph graph_from_json(const nlohmann::json& j);

}  // namespace fkit
