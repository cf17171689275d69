#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "fkit/graphs.hpp"

namespace fkit {

using Complex = std::complex<double>;
using Vec2 = std::array<double, 2>;

/// Hyperbolic angle phi(p,q) = arg((q-p)/(q-conj(p))), in (-pi, pi].
double angle(Complex p, Complex q);

/// Gradients of angle(p,q) with respect to the real coordinates of p and q.
struct AngleGradient {
  Vec2 dp{};
  Vec2 dq{};
};
AngleGradient angle_gradient(Complex p, Complex q);

enum class Endpoint { Source, Target };

/// Directional derivative of angle(p,q) when the chosen endpoint moves along
/// `direction`.
double dangle(Complex p, Complex q, Endpoint which, Vec2 direction);

/// phi_D(p,q,r) = phi(q,r) - phi(q,p).
double phi_D(Complex p, Complex q, Complex r);

struct AngleGradientD {
  Vec2 dp{};
  Vec2 dq{};
  Vec2 dr{};
};
/// omega_D = d phi_D as gradients in the three points.
AngleGradientD omega_D(Complex p, Complex q, Complex r);

/// psi(z) = (z-i)/(z+i) and its inverse i(1+w)/(1-w).
Complex mobius_psi(Complex z);
Complex mobius_psi_inv(Complex w);

/// Configuration in the punctured disk: interior points with 0<|z|<1 and
/// boundary points on the circle, boundary[0] == 1.
struct DiskConfig {
  std::vector<Complex> interior;
  std::vector<Complex> boundary;

  /// Throws ValidationError when an invariant fails.
  void check() const;
};

/// Tangent vector at a DiskConfig: velocities of interior points and angular
/// velocities of boundary points.
struct DiskTangent {
  std::vector<Complex> interior;
  std::vector<double> boundary;
};

/// True when the edge carries the identically-zero form (edges into the
/// special vertex, out of or into b1 from the special vertex).
bool shoikhet_zero_edge(const Edge& e);

/// omega_{D,e} at cfg applied to the tangent. Evaluated in the upper half-plane
/// picture: the special vertex sits at i and b1 at infinity.
double shoikhet_edge_form(const AdmissibleGraph& g, const Edge& e, const DiskConfig& cfg,
                          const DiskTangent& direction);

enum class Space { C, D };

/// A gauge slice of the open configuration space parametrized by the open unit
/// cube. C: q1=0, q2=1 (m>=2); q1=0, |p1|=1 (m=1); p1=i (m=0). D: b1=1.
struct GaugeChart {
  Space space = Space::C;
  int n = 0;
  int m = 0;
  int dim = 0;
  std::string descriptor;
  /// Sign of the slice frame against the canonical orientation.
  int orientation = 1;
};

GaugeChart gauge_chart(Space space, int n, int m);

/// A chart point pushed to the upper half-plane picture, with derivatives.
/// Vertex slots: First(1..n), Second(1..m), then Special (D only).
struct Embedding {
  int dim = 0;
  int n = 0;
  int m = 0;
  bool special = false;
  std::vector<Complex> pos;
  /// d pos[v] / d u_k stored at deriv[v * dim + k].
  std::vector<Complex> deriv;
  /// b1 of a D chart sits at infinity.
  std::vector<char> at_infinity;

  int slot(const VertexRef& v) const;
  Complex position(const VertexRef& v) const { return pos[slot(v)]; }
};

/// Embeds coordinates u in (0,1)^dim. Throws DegenerateConfiguration when two
/// points come within 1e-12 of each other (measured in the disk picture).
Embedding embed(const GaugeChart& chart, const std::vector<double>& u);

/// The disk picture of a D chart point.
DiskConfig embed_disk(const GaugeChart& chart, const std::vector<double>& u);

/// Signed density of the slice: det[T, E, frame] for C (translation, dilation)
/// and det[R, frame] for D (rotation).
double jacobian(const GaugeChart& chart, const std::vector<double>& u);

/// Row of edge-form values on the coordinate directions d/du_k. Returns false
/// (row untouched) for an identically zero form.
bool edge_form_row(const AdmissibleGraph& g, const Edge& e, const Embedding& emb, double* row);

/// One numerical limit probe toward a boundary stratum.
struct LemmaProbe {
  std::string name;
  double epsilon = 0.0;
  double residual = 0.0;
};

/// Limit probes for the angle-form lemmas: omega items i, ii and omega_D items
/// i, ii, iv (real and interior), v, vi. The residual is the max deviation of
/// the pulled-back form from its predicted restriction, over `points` random
/// base configurations.
std::vector<LemmaProbe> lemma_probes(double epsilon, unsigned seed = 1, int points = 16);

}  // namespace fkit
