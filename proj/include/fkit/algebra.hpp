#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkit/errors.hpp"
#include "fkit/poly.hpp"

namespace fkit {

/// Sorted index tuple stored as a bitmask (bit i = index i, 0-based).
using Mask = std::uint32_t;

inline int mask_size(Mask a) { return std::popcount(a); }

inline std::vector<int> mask_indices(Mask a) {
  std::vector<int> out;
  for (int i = 0; a; ++i, a >>= 1)
    if (a & 1u) out.push_back(i);
  return out;
}

/// Sign that sorts the concatenation (A, B) of two disjoint sorted tuples.
inline int merge_sign(Mask a, Mask b) {
  int inv = 0;
  for (int j : mask_indices(b)) inv += std::popcount(a >> (j + 1));
  return inv % 2 ? -1 : 1;
}

/// Sorts an index tuple; returns its sign, or 0 when an index repeats.
inline int sort_sign(std::vector<int>& idx, Mask* mask = nullptr) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  if (mask) {
    *mask = 0;
    for (int i : idx) *mask |= Mask{1} << i;
  }
  return sign;
}

template <class S>
S sign_scalar(int s) {
  return ScalarTraits<S>::from_int(s);
}

/// Skew tensor field with polynomial coefficients on sorted index tuples.
/// Kind 0: polyvector fields, kind 1: differential forms.
template <class S, int Kind>
class SkewField {
 public:
  using P = Poly<S>;

  SkewField() = default;
  SkewField(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 0 || dim > kMaxVars) throw ValidationError("skew field: dimension out of range");
    if (degree > dim) throw ValidationError("skew field: degree exceeds dimension");
  }
  static SkewField function(const P& f) {
    SkewField s(f.dim(), 0);
    s.add(0, f);
    return s;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::map<Mask, P>& components() const { return comps_; }
  bool is_zero() const { return comps_.empty(); }

  P component(Mask a) const {
    auto it = comps_.find(a);
    return it == comps_.end() ? P(dim_) : it->second;
  }
  /// Component on an arbitrary index tuple, extended by skew symmetry.
  P full_component(std::vector<int> idx) const {
    Mask m = 0;
    int s = sort_sign(idx, &m);
    if (s == 0) return P(dim_);
    return component(m) * sign_scalar<S>(s);
  }
  void add(Mask a, const P& p) {
    if (mask_size(a) != degree_) throw ValidationError("skew field: wrong component degree");
    if (p.is_zero()) return;
    auto [it, fresh] = comps_.emplace(a, p);
    if (!fresh) {
      it->second += p;
      if (it->second.is_zero()) comps_.erase(it);
    }
  }
  void add_full(std::vector<int> idx, const P& p) {
    Mask m = 0;
    int s = sort_sign(idx, &m);
    if (s != 0) add(m, p * sign_scalar<S>(s));
  }

  SkewField& operator+=(const SkewField& o) {
    check(o);
    for (const auto& [m, p] : o.comps_) add(m, p);
    return *this;
  }
  SkewField& operator-=(const SkewField& o) {
    check(o);
    for (const auto& [m, p] : o.comps_) add(m, -p);
    return *this;
  }
  friend SkewField operator+(SkewField a, const SkewField& b) { return a += b; }
  friend SkewField operator-(SkewField a, const SkewField& b) { return a -= b; }
  friend SkewField operator*(const S& s, const SkewField& a) {
    SkewField r(a.dim_, a.degree_);
    for (const auto& [m, p] : a.comps_) r.add(m, p * s);
    return r;
  }
  friend SkewField operator*(const P& f, const SkewField& a) {
    SkewField r(a.dim_, a.degree_);
    for (const auto& [m, p] : a.comps_) r.add(m, f * p);
    return r;
  }
  friend bool operator==(const SkewField& a, const SkewField& b) {
    return a.degree_ == b.degree_ && a.comps_ == b.comps_;
  }

  double max_abs() const {
    double v = 0;
    for (const auto& [m, p] : comps_) v = std::max(v, p.max_abs());
    return v;
  }
  double max_error() const {
    double v = 0;
    for (const auto& [m, p] : comps_) v = std::max(v, p.max_error());
    return v;
  }

  template <class T>
  SkewField<T, Kind> cast() const {
    SkewField<T, Kind> r(dim_, degree_);
    for (const auto& [m, p] : comps_) r.add(m, p.template cast<T>());
    return r;
  }

  std::string to_string() const {
    if (comps_.empty()) return "0";
    std::string out;
    for (const auto& [m, p] : comps_) {
      if (!out.empty()) out += " + ";
      out += "(" + p.to_string() + ")";
      for (int i : mask_indices(m)) out += (Kind == 0 ? "*d" : "*dx") + std::to_string(i + 1);
    }
    return out;
  }

 private:
  void check(const SkewField& o) const {
    if (o.degree_ != degree_) throw ValidationError("skew field: degree mismatch");
  }

  int dim_ = 0;
  int degree_ = 0;
  std::map<Mask, P> comps_;
};

template <class S>
using PolyVectorField = SkewField<S, 0>;
template <class S>
using DiffForm = SkewField<S, 1>;
using QPolyVector = PolyVectorField<Rational>;
using QForm = DiffForm<Rational>;

/// Graded-commutative product of two fields of the same kind.
template <class S, int K>
SkewField<S, K> wedge(const SkewField<S, K>& a, const SkewField<S, K>& b) {
  int dim = std::max(a.dim(), b.dim());
  if (a.degree() + b.degree() > dim) return SkewField<S, K>(dim, std::min(dim, a.degree() + b.degree()));
  SkewField<S, K> r(dim, a.degree() + b.degree());
  for (const auto& [ma, pa] : a.components())
    for (const auto& [mb, pb] : b.components()) {
      if (ma & mb) continue;
      r.add(ma | mb, pa * pb * sign_scalar<S>(merge_sign(ma, mb)));
    }
  return r;
}

/// Schouten-Nijenhuis bracket via the superfunction formula
/// [P,Q] = sum_i (P d<_{theta_i})(d_{x_i} Q) - (d_{x_i} P)(d>_{theta_i} Q).
/// For vector fields this is the Lie bracket.
template <class S>
PolyVectorField<S> schouten_sn(const PolyVectorField<S>& a, const PolyVectorField<S>& b) {
  int dim = std::max(a.dim(), b.dim());
  int deg = a.degree() + b.degree() - 1;
  if (deg < 0) return PolyVectorField<S>(dim, 0);
  if (deg > dim) return PolyVectorField<S>(dim, dim);
  PolyVectorField<S> r(dim, deg);
  for (int i = 0; i < dim; ++i) {
    const Mask bit = Mask{1} << i;
    for (const auto& [ma, pa] : a.components()) {
      for (const auto& [mb, pb] : b.components()) {
        if (ma & bit) {
          // right derivative of theta_A: move theta_i past the larger indices
          int s = std::popcount(ma >> (i + 1)) % 2 ? -1 : 1;
          Mask rest = ma & ~bit;
          if (!(rest & mb)) {
            auto q = pb.derivative(i);
            if (!q.is_zero()) r.add(rest | mb, pa * q * sign_scalar<S>(s * merge_sign(rest, mb)));
          }
        }
        if (mb & bit) {
          int s = std::popcount(mb & (bit - 1)) % 2 ? -1 : 1;
          Mask rest = mb & ~bit;
          if (!(ma & rest)) {
            auto q = pa.derivative(i);
            if (!q.is_zero()) r.add(ma | rest, q * pb * sign_scalar<S>(-s * merge_sign(ma, rest)));
          }
        }
      }
    }
  }
  return r;
}

/// The modified bracket [a,b]' = -[b,a]_SN = (-1)^{(k-1)(l-1)} [a,b]_SN.
template <class S>
PolyVectorField<S> schouten(const PolyVectorField<S>& a, const PolyVectorField<S>& b) {
  auto r = schouten_sn(b, a);
  return sign_scalar<S>(-1) * r;
}

/// Exterior derivative.
template <class S>
DiffForm<S> exterior_d(const DiffForm<S>& w) {
  int dim = w.dim();
  if (w.degree() + 1 > dim) return DiffForm<S>(dim, dim);
  DiffForm<S> r(dim, w.degree() + 1);
  for (const auto& [m, p] : w.components())
    for (int i = 0; i < dim; ++i) {
      Mask bit = Mask{1} << i;
      if (m & bit) continue;
      auto q = p.derivative(i);
      if (!q.is_zero()) r.add(m | bit, q * sign_scalar<S>(merge_sign(bit, m)));
    }
  return r;
}

template <class S>
DiffForm<S> exterior_d(const Poly<S>& f) {
  return exterior_d(DiffForm<S>::function(f));
}

/// Contraction with full-index sums: (i_a w)_J = sum over all ordered I of
/// a^I w_{I,J}. A function acts by multiplication. Degree k > l gives zero.
template <class S>
DiffForm<S> contract(const PolyVectorField<S>& a, const DiffForm<S>& w) {
  int dim = std::max(a.dim(), w.dim());
  int k = a.degree(), l = w.degree();
  if (k > l) return DiffForm<S>(dim, 0);
  DiffForm<S> r(dim, l - k);
  Rational kf = 1;
  for (int t = 2; t <= k; ++t) kf *= t;
  S fac = ScalarTraits<S>::from_rational(kf);
  for (const auto& [ma, pa] : a.components())
    for (const auto& [mw, pw] : w.components()) {
      if ((ma & mw) != ma) continue;
      Mask rest = mw & ~ma;
      r.add(rest, pa * pw * (fac * sign_scalar<S>(merge_sign(ma, rest))));
    }
  return r;
}

/// Full-sum pairing of a k-vector with a k-form.
template <class S>
Poly<S> pairing(const PolyVectorField<S>& a, const DiffForm<S>& w) {
  if (a.degree() != w.degree()) throw ValidationError("pairing: degree mismatch");
  return contract(a, w).component(0);
}

/// L_g = d i_g - (-1)^k i_g d for a k-vector g; lowers form degree by k-1.
template <class S>
DiffForm<S> lie_derivative(const PolyVectorField<S>& g, const DiffForm<S>& w) {
  int dim = std::max(g.dim(), w.dim());
  int k = g.degree(), l = w.degree();
  int deg = l + 1 - k;
  if (deg < 0) return DiffForm<S>(dim, 0);
  DiffForm<S> r(dim, deg);
  if (k <= l) r += exterior_d(contract(g, w));
  if (k <= l + 1 && l + 1 <= dim) {
    auto t = contract(g, exterior_d(w));
    r += (k % 2 ? sign_scalar<S>(1) : sign_scalar<S>(-1)) * t;
  }
  return r;
}

// ---------------------------------------------------------------------------

using Signature = std::vector<MultiIndex>;

/// Polydifferential operator sum c_sig(x) d^{sig_1} f_1 ... d^{sig_m} f_m.
template <class S>
class PolyDiffOp {
 public:
  using P = Poly<S>;

  PolyDiffOp() = default;
  PolyDiffOp(int dim, int arity) : dim_(dim), arity_(arity) {
    if (arity < 0) throw ValidationError("operator arity must be non-negative");
  }

  static PolyDiffOp identity(int dim) {
    PolyDiffOp op(dim, 1);
    op.add_term({MultiIndex{}}, P::constant(dim, ScalarTraits<S>::from_int(1)));
    return op;
  }
  /// Pointwise product of `arity` functions.
  static PolyDiffOp product(int dim, int arity = 2) {
    PolyDiffOp op(dim, arity);
    op.add_term(Signature(arity), P::constant(dim, ScalarTraits<S>::from_int(1)));
    return op;
  }
  /// Arity-0 operator returning f.
  static PolyDiffOp constant(const P& f) {
    PolyDiffOp op(f.dim(), 0);
    op.add_term({}, f);
    return op;
  }

  int dim() const { return dim_; }
  int arity() const { return arity_; }
  const std::map<Signature, P>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Signature& sig, const P& c) {
    if (static_cast<int>(sig.size()) != arity_) throw ValidationError("operator: signature arity");
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.emplace(sig, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  P apply(const std::vector<P>& args) const {
    if (static_cast<int>(args.size()) != arity_) throw ValidationError("operator: wrong number of arguments");
    P out(dim_);
    for (const auto& [sig, c] : terms_) {
      P t = c;
      for (int j = 0; j < arity_ && !t.is_zero(); ++j) t = t * args[j].derivative(sig[j]);
      out += t;
    }
    return out;
  }

  PolyDiffOp& operator+=(const PolyDiffOp& o) {
    check(o);
    for (const auto& [s, c] : o.terms_) add_term(s, c);
    return *this;
  }
  PolyDiffOp& operator-=(const PolyDiffOp& o) {
    check(o);
    for (const auto& [s, c] : o.terms_) add_term(s, -c);
    return *this;
  }
  friend PolyDiffOp operator+(PolyDiffOp a, const PolyDiffOp& b) { return a += b; }
  friend PolyDiffOp operator-(PolyDiffOp a, const PolyDiffOp& b) { return a -= b; }
  friend PolyDiffOp operator*(const S& s, const PolyDiffOp& a) {
    PolyDiffOp r(a.dim_, a.arity_);
    for (const auto& [sig, c] : a.terms_) r.add_term(sig, c * s);
    return r;
  }
  friend bool operator==(const PolyDiffOp& a, const PolyDiffOp& b) {
    return a.arity_ == b.arity_ && a.terms_ == b.terms_;
  }

  double max_abs() const {
    double v = 0;
    for (const auto& [s, c] : terms_) v = std::max(v, c.max_abs());
    return v;
  }
  double max_error() const {
    double v = 0;
    for (const auto& [s, c] : terms_) v = std::max(v, c.max_error());
    return v;
  }

  template <class T>
  PolyDiffOp<T> cast() const {
    PolyDiffOp<T> r(dim_, arity_);
    for (const auto& [s, c] : terms_) r.add_term(s, c.template cast<T>());
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [sig, c] : terms_) {
      if (!out.empty()) out += " + ";
      out += "(" + c.to_string() + ")";
      for (int j = 0; j < arity_; ++j) {
        out += "*D[";
        bool first = true;
        for (int i = 0; i < kMaxVars; ++i)
          for (int r = 0; r < sig[j][i]; ++r) {
            if (!first) out += ",";
            out += std::to_string(i + 1);
            first = false;
          }
        out += "]f" + std::to_string(j + 1);
      }
    }
    return out;
  }

 private:
  void check(const PolyDiffOp& o) const {
    if (o.arity_ != arity_) throw ValidationError("operator: arity mismatch");
    dim_ = std::max(dim_, o.dim_);
  }

  mutable int dim_ = 0;
  int arity_ = 0;
  std::map<Signature, P> terms_;
};

using QDiffOp = PolyDiffOp<Rational>;

/// The operator d^alpha o Q (Leibniz rule over Q's coefficient and arguments).
template <class S>
PolyDiffOp<S> derivative_of(const PolyDiffOp<S>& q, const MultiIndex& alpha) {
  PolyDiffOp<S> cur = q;
  for (int i = 0; i < kMaxVars; ++i)
    for (int r = 0; r < alpha[i]; ++r) {
      PolyDiffOp<S> next(cur.dim(), cur.arity());
      for (const auto& [sig, c] : cur.terms()) {
        next.add_term(sig, c.derivative(i));
        for (int j = 0; j < cur.arity(); ++j) {
          Signature s2 = sig;
          s2[j][i] += 1;
          next.add_term(s2, c);
        }
      }
      cur = std::move(next);
    }
  return cur;
}

/// Operator with concatenated arguments and multiplied coefficients.
template <class S>
PolyDiffOp<S> tensor(const PolyDiffOp<S>& a, const PolyDiffOp<S>& b) {
  PolyDiffOp<S> r(std::max(a.dim(), b.dim()), a.arity() + b.arity());
  for (const auto& [sa, ca] : a.terms())
    for (const auto& [sb, cb] : b.terms()) {
      Signature s = sa;
      s.insert(s.end(), sb.begin(), sb.end());
      r.add_term(s, ca * cb);
    }
  return r;
}

/// P(Q_1(...), ..., Q_r(...)), arguments of the Q_j concatenated in order.
template <class S>
PolyDiffOp<S> compose(const PolyDiffOp<S>& p, const std::vector<PolyDiffOp<S>>& qs) {
  if (static_cast<int>(qs.size()) != p.arity()) throw ValidationError("compose: arity mismatch");
  int dim = p.dim();
  int arity = 0;
  for (const auto& q : qs) {
    arity += q.arity();
    dim = std::max(dim, q.dim());
  }
  PolyDiffOp<S> out(dim, arity);
  std::vector<std::map<MultiIndex, PolyDiffOp<S>>> memo(qs.size());
  for (const auto& [sig, c] : p.terms()) {
    PolyDiffOp<S> acc = PolyDiffOp<S>::constant(c);
    for (std::size_t j = 0; j < qs.size() && !acc.is_zero(); ++j) {
      auto it = memo[j].find(sig[j]);
      if (it == memo[j].end()) it = memo[j].emplace(sig[j], derivative_of(qs[j], sig[j])).first;
      acc = tensor(acc, it->second);
    }
    if (!acc.is_zero()) out += acc;
  }
  return out;
}

/// (f_1..f_k) -> sum over all ordered index tuples of a^I d_{i1} f_1 ... d_{ik} f_k.
template <class S>
PolyDiffOp<S> hkr_cochain(const PolyVectorField<S>& a) {
  int k = a.degree();
  PolyDiffOp<S> op(a.dim(), k);
  for (const auto& [m, p] : a.components()) {
    std::vector<int> idx = mask_indices(m);
    std::sort(idx.begin(), idx.end());
    do {
      std::vector<int> tmp = idx;
      int s = sort_sign(tmp);
      Signature sig(k);
      for (int j = 0; j < k; ++j) sig[j] = MultiIndex::unit(idx[j]);
      op.add_term(sig, p * sign_scalar<S>(s));
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  return op;
}

// ---------------------------------------------------------------------------

/// Hochschild chain: a formal sum of tensors a_0 | a_1 | ... | a_n, stored
/// multilinearly expanded over monomials.
template <class S>
class HochschildChain {
 public:
  using P = Poly<S>;
  using Word = std::vector<Monomial>;

  HochschildChain() = default;
  HochschildChain(int dim, int length) : dim_(dim), length_(length) {
    if (length < 1) throw ValidationError("chain needs at least one entry");
  }
  /// The single tensor a_0 | ... | a_n.
  explicit HochschildChain(const std::vector<P>& entries) {
    if (entries.empty()) throw ValidationError("chain needs at least one entry");
    length_ = static_cast<int>(entries.size());
    for (const auto& e : entries) dim_ = std::max(dim_, e.dim());
    add_tensor(entries, ScalarTraits<S>::from_int(1));
  }

  int dim() const { return dim_; }
  int length() const { return length_; }
  /// Homological degree n for length n+1.
  int n() const { return length_ - 1; }
  const std::map<Word, S>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_word(const Word& w, const S& c) {
    if (static_cast<int>(w.size()) != length_) throw ValidationError("chain: length mismatch");
    if (ScalarTraits<S>::is_zero(c)) return;
    auto [it, fresh] = terms_.emplace(w, c);
    if (!fresh) {
      it->second += c;
      if (ScalarTraits<S>::is_zero(it->second)) terms_.erase(it);
    }
  }
  void add_tensor(const std::vector<P>& entries, const S& c) {
    if (static_cast<int>(entries.size()) != length_) throw ValidationError("chain: length mismatch");
    Word w(entries.size());
    expand(entries, 0, w, c);
  }

  /// Entries of one stored word as polynomials.
  std::vector<P> entries(const Word& w) const {
    std::vector<P> out;
    for (const auto& m : w) out.push_back(P::monomial(dim_, m, ScalarTraits<S>::from_int(1)));
    return out;
  }

  HochschildChain& operator+=(const HochschildChain& o) {
    if (o.length_ != length_) throw ValidationError("chain: length mismatch");
    dim_ = std::max(dim_, o.dim_);
    for (const auto& [w, c] : o.terms_) add_word(w, c);
    return *this;
  }
  HochschildChain& operator-=(const HochschildChain& o) {
    if (o.length_ != length_) throw ValidationError("chain: length mismatch");
    dim_ = std::max(dim_, o.dim_);
    for (const auto& [w, c] : o.terms_) add_word(w, -c);
    return *this;
  }
  friend HochschildChain operator+(HochschildChain a, const HochschildChain& b) { return a += b; }
  friend HochschildChain operator-(HochschildChain a, const HochschildChain& b) { return a -= b; }
  friend HochschildChain operator*(const S& s, const HochschildChain& a) {
    HochschildChain r(a.dim_, a.length_);
    for (const auto& [w, c] : a.terms_) r.add_word(w, c * s);
    return r;
  }
  friend bool operator==(const HochschildChain& a, const HochschildChain& b) {
    return a.length_ == b.length_ && a.terms_ == b.terms_;
  }

  double max_abs() const {
    double v = 0;
    for (const auto& [w, c] : terms_) v = std::max(v, ScalarTraits<S>::magnitude(c));
    return v;
  }

  template <class T>
  HochschildChain<T> cast() const {
    HochschildChain<T> r(dim_, length_);
    for (const auto& [w, c] : terms_) r.add_word(w, scalar_cast<T>(c));
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [w, c] : terms_) {
      if (!out.empty()) out += " + ";
      out += ScalarTraits<S>::to_string(c) + "*(";
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (j) out += " | ";
        out += P::monomial(dim_, w[j], ScalarTraits<S>::from_int(1)).to_string();
      }
      out += ")";
    }
    return out;
  }

 private:
  void expand(const std::vector<P>& e, std::size_t j, Word& w, const S& c) {
    if (j == e.size()) {
      add_word(w, c);
      return;
    }
    for (const auto& [m, a] : e[j].terms()) {
      w[j] = m;
      expand(e, j + 1, w, c * a);
    }
  }

  int dim_ = 0;
  int length_ = 1;
  std::map<Word, S> terms_;
};

using QChain = HochschildChain<Rational>;

/// Parses `a0 | a1 | a2` into a chain with exact coefficients.
QChain parse_chain(const std::string& text, int dim = 0);

/// (a_0|...|a_n) -> (1/n!) a_0 da_1 ^ ... ^ da_n.
template <class S>
DiffForm<S> hkr_chain(const HochschildChain<S>& c) {
  int n = c.n();
  int dim = c.dim();
  if (n > dim) return DiffForm<S>(dim, dim);
  DiffForm<S> out(dim, n);
  Rational nf = 1;
  for (int t = 2; t <= n; ++t) nf *= t;
  S inv = ScalarTraits<S>::from_rational(1 / nf);
  for (const auto& [w, coef] : c.terms()) {
    auto e = c.entries(w);
    DiffForm<S> f = DiffForm<S>::function(e[0]);
    for (int j = 1; j <= n && !f.is_zero(); ++j) f = wedge(f, exterior_d(e[j]));
    if (f.degree() == n) out += (coef * inv) * f;
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Truncated power series in hbar; entry k is the coefficient of hbar^k.
template <class T>
struct HbarSeries {
  std::vector<T> c;

  HbarSeries() = default;
  HbarSeries(int order, const T& zero) : c(static_cast<std::size_t>(order + 1), zero) {}
  int order() const { return static_cast<int>(c.size()) - 1; }
  T& operator[](int k) { return c[k]; }
  const T& operator[](int k) const { return c[k]; }
};

/// The product mu + B = sum hbar^k M_k on polynomials in `dim` variables.
template <class S>
class StarAlgebra {
 public:
  using P = Poly<S>;
  using Op = PolyDiffOp<S>;
  using OpSeries = HbarSeries<Op>;
  using Chain = HochschildChain<S>;

  StarAlgebra() = default;
  StarAlgebra(int dim, std::vector<Op> components) : dim_(dim), m_(std::move(components)) {
    if (m_.empty()) m_.push_back(Op::product(dim));
    for (const auto& op : m_)
      if (op.arity() != 2) throw ValidationError("star product components must be bidifferential");
  }
  /// The undeformed product truncated at `order`.
  static StarAlgebra classical(int dim, int order) {
    std::vector<Op> comps{Op::product(dim)};
    for (int k = 1; k <= order; ++k) comps.emplace_back(dim, 2);
    return StarAlgebra(dim, comps);
  }

  int dim() const { return dim_; }
  int order() const { return static_cast<int>(m_.size()) - 1; }
  const Op& component(int k) const { return m_[k]; }
  OpSeries as_series() const {
    OpSeries s(order(), Op(dim_, 2));
    for (int k = 0; k <= order(); ++k) s[k] = m_[k];
    return s;
  }

  HbarSeries<P> star(const P& f, const P& g) const {
    HbarSeries<P> out(order(), P(dim_));
    for (int k = 0; k <= order(); ++k) out[k] = m_[k].apply({f, g});
    return out;
  }
  /// Product of two series of functions, truncated.
  HbarSeries<P> star(const HbarSeries<P>& f, const HbarSeries<P>& g) const {
    HbarSeries<P> out(order(), P(dim_));
    for (int i = 0; i <= std::min(order(), f.order()); ++i)
      for (int j = 0; i + j <= order() && j <= g.order(); ++j)
        for (int k = 0; i + j + k <= order(); ++k) out[i + j + k] += m_[k].apply({f[i], g[j]});
    return out;
  }

  /// Series composition P(Q_1, ..., Q_r), truncated.
  OpSeries compose_series(const OpSeries& p, const std::vector<OpSeries>& qs) const {
    int arity = 0;
    for (const auto& q : qs) arity += q[0].arity();
    OpSeries out(order(), Op(dim_, arity));
    std::vector<int> idx(qs.size(), 0);
    for (int i = 0; i <= std::min(order(), p.order()); ++i) {
      if (p[i].is_zero()) continue;
      // distribute the remaining order over the inner series
      std::vector<const Op*> pick(qs.size());
      auto rec = [&](auto&& self, std::size_t j, int used) -> void {
        if (j == qs.size()) {
          std::vector<Op> inner;
          for (auto* o : pick) inner.push_back(*o);
          out[used] += compose(p[i], inner);
          return;
        }
        for (int k = 0; used + k <= order() && k <= qs[j].order(); ++k) {
          if (qs[j][k].is_zero()) continue;
          pick[j] = &qs[j][k];
          self(self, j + 1, used + k);
        }
      };
      rec(rec, 0, i);
    }
    return out;
  }

  OpSeries constant_series(const Op& op) const {
    OpSeries s(order(), Op(dim_, op.arity()));
    s[0] = op;
    return s;
  }

  /// (phi u psi)(a..., b...) = phi(a...) * psi(b...).
  OpSeries cup(const OpSeries& phi, const OpSeries& psi) const {
    return compose_series(as_series(), {phi, psi});
  }

  /// Hochschild differential with all products taken by the star product.
  OpSeries hochschild_d(const OpSeries& phi) const {
    int p = phi[0].arity();
    auto id = constant_series(Op::identity(dim_));
    auto mu = as_series();
    auto out = compose_series(mu, {id, phi});
    for (int i = 1; i <= p; ++i) {
      std::vector<OpSeries> args;
      for (int j = 1; j <= p; ++j) args.push_back(j == i ? mu : id);
      auto t = compose_series(phi, args);
      accumulate(out, t, i % 2 ? -1 : 1);
    }
    accumulate(out, compose_series(mu, {phi, id}), (p + 1) % 2 ? -1 : 1);
    return out;
  }

  /// Associator (f*g)*h - f*(g*h) as a tridifferential operator series; its
  /// hbar^k component is the Maurer-Cartan defect of B at that order.
  OpSeries associator() const {
    auto mu = as_series();
    auto id = constant_series(Op::identity(dim_));
    auto out = compose_series(mu, {mu, id});
    accumulate(out, compose_series(mu, {id, mu}), -1);
    return out;
  }

  /// Per-order norms of the associator (the Maurer-Cartan residual).
  std::vector<double> mc_residual() const {
    auto a = associator();
    std::vector<double> out;
    for (int k = 0; k <= order(); ++k) out.push_back(a[k].max_abs());
    return out;
  }

  /// phi cap (a0|...|an) = (a0 * phi(a1..am) | a_{m+1} | ... | a_n); zero for m > n.
  HbarSeries<Chain> cap(const OpSeries& phi, const Chain& c) const {
    int m = phi[0].arity();
    int n = c.n();
    int len = m > n ? 1 : c.length() - m;
    HbarSeries<Chain> out(order(), Chain(std::max(dim_, c.dim()), len));
    if (m > n) return out;
    for (const auto& [w, coef] : c.terms()) {
      auto e = c.entries(w);
      std::vector<P> args(e.begin() + 1, e.begin() + 1 + m);
      for (int i = 0; i <= std::min(order(), phi.order()); ++i) {
        if (phi[i].is_zero()) continue;
        P v = phi[i].apply(args);
        if (v.is_zero()) continue;
        for (int k = 0; i + k <= order(); ++k) {
          P head = m_[k].apply({e[0], v});
          if (head.is_zero()) continue;
          std::vector<P> entries{head};
          entries.insert(entries.end(), e.begin() + 1 + m, e.end());
          out[i + k].add_tensor(entries, coef);
        }
      }
    }
    return out;
  }

  /// Cyclic Hochschild boundary with star products. b of a 0-chain is zero.
  HbarSeries<Chain> hochschild_b(const Chain& c) const {
    int n = c.n();
    HbarSeries<Chain> out(order(), Chain(std::max(dim_, c.dim()), std::max(1, n)));
    if (n == 0) return out;
    for (const auto& [w, coef] : c.terms()) {
      auto e = c.entries(w);
      for (int k = 0; k <= order(); ++k) {
        for (int i = 0; i < n; ++i) {
          P prod = m_[k].apply({e[i], e[i + 1]});
          if (prod.is_zero()) continue;
          std::vector<P> entries;
          for (int j = 0; j < i; ++j) entries.push_back(e[j]);
          entries.push_back(prod);
          for (int j = i + 2; j <= n; ++j) entries.push_back(e[j]);
          out[k].add_tensor(entries, i % 2 ? -coef : coef);
        }
        P prod = m_[k].apply({e[n], e[0]});
        if (prod.is_zero()) continue;
        std::vector<P> entries{prod};
        for (int j = 1; j < n; ++j) entries.push_back(e[j]);
        out[k].add_tensor(entries, n % 2 ? -coef : coef);
      }
    }
    return out;
  }

 private:
  static void accumulate(OpSeries& out, const OpSeries& t, int sign) {
    for (int k = 0; k <= std::min(out.order(), t.order()); ++k)
      out[k] += sign > 0 ? t[k] : sign_scalar<S>(-1) * t[k];
  }

  int dim_ = 0;
  std::vector<Op> m_;
};

}  // namespace fkit
