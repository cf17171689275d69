#include "fkit/duflo.hpp"

#include <algorithm>

namespace fkit {

namespace {

Rational q(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

QPoly truncate(const QPoly& p, int degree) {
  QPoly out(p.dim());
  for (const auto& [m, c] : p.terms())
    if (m.degree() <= degree) out.add_term(m, c);
  return out;
}

/// exp(p) up to `degree` for p without constant term.
QPoly exp_truncated(const QPoly& p, int degree) {
  QPoly out = QPoly::constant(p.dim(), 1);
  QPoly term = out;
  for (int n = 1; n <= degree; ++n) {
    term = truncate(term * p, degree) * q(1, n);
    if (term.is_zero()) break;
    out += term;
  }
  return out;
}

PbwWord word_of(const Monomial& m, int r) {
  PbwWord w;
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < m.e[i]; ++k) w.push_back(static_cast<std::uint8_t>(i));
  return w;
}

}  // namespace

LieAlgebra::LieAlgebra(int dim, std::vector<Rational> c, std::string name)
    : dim_(dim), c_(std::move(c)), name_(std::move(name)) {
  if (dim < 0 || dim > kMaxVars) throw ValidationError("Lie algebra: dimension out of range");
  if (static_cast<int>(c_.size()) != dim * dim * dim) throw ValidationError("Lie algebra: wrong table size");
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        if (this->c(i, j, k) != -this->c(j, i, k))
          throw ValidationError("Lie algebra: structure constants are not skew");
  // [[x_i,x_j],x_l] + cyclic = 0
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int l = 0; l < dim; ++l)
        for (int t = 0; t < dim; ++t) {
          Rational s = 0;
          for (int k = 0; k < dim; ++k)
            s += this->c(i, j, k) * this->c(k, l, t) + this->c(j, l, k) * this->c(k, i, t) +
                 this->c(l, i, k) * this->c(k, j, t);
          if (sgn(s) != 0) throw ValidationError("Lie algebra: Jacobi identity fails");
        }
}

namespace {
LieAlgebra from_table(int r, std::initializer_list<std::tuple<int, int, int, Rational>> entries,
                      std::string name) {
  std::vector<Rational> c(static_cast<std::size_t>(r * r * r), Rational(0));
  for (const auto& [i, j, k, v] : entries) {
    c[((i - 1) * r + (j - 1)) * r + (k - 1)] = v;
    c[((j - 1) * r + (i - 1)) * r + (k - 1)] = -v;
  }
  return LieAlgebra(r, std::move(c), std::move(name));
}
}  // namespace

LieAlgebra LieAlgebra::abelian(int r) { return from_table(r, {}, "abelian"); }
LieAlgebra LieAlgebra::heisenberg() { return from_table(3, {{1, 2, 3, q(1)}}, "heisenberg"); }
LieAlgebra LieAlgebra::sl2() { return from_table(3, {{1, 2, 2, q(2)}, {1, 3, 3, q(-2)}, {2, 3, 1, q(1)}}, "sl2"); }
LieAlgebra LieAlgebra::so3() { return from_table(3, {{1, 2, 3, q(1)}, {2, 3, 1, q(1)}, {1, 3, 2, q(-1)}}, "so3"); }

LieAlgebra LieAlgebra::named(const std::string& name) {
  if (name == "abelian") return abelian();
  if (name == "heisenberg") return heisenberg();
  if (name == "sl2") return sl2();
  if (name == "so3") return so3();
  throw ParseError("unknown Lie algebra '" + name + "'");
}

LieAlgebra LieAlgebra::from_json(const nlohmann::json& j) {
  try {
    int r = j.at("dim").get<int>();
    if (r < 0 || r > kMaxVars) throw ParseError("Lie algebra JSON: dimension out of range");
    std::vector<Rational> c(static_cast<std::size_t>(r * r * r), Rational(0));
    for (const auto& e : j.at("c")) {
      int i = e.at(0).get<int>(), jj = e.at(1).get<int>(), k = e.at(2).get<int>();
      long num = e.at(3).get<long>(), den = e.size() > 4 ? e.at(4).get<long>() : 1;
      if (i < 1 || jj < 1 || k < 1 || i > r || jj > r || k > r || i >= jj || den == 0)
        throw ParseError("Lie algebra JSON: bad entry " + e.dump());
      c[((i - 1) * r + (jj - 1)) * r + (k - 1)] = q(num, den);
      c[((jj - 1) * r + (i - 1)) * r + (k - 1)] = -q(num, den);
    }
    return LieAlgebra(r, std::move(c), j.value("name", std::string()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("Lie algebra JSON: ") + e.what());
  }
}

nlohmann::json LieAlgebra::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  if (!name_.empty()) j["name"] = name_;
  j["c"] = nlohmann::json::array();
  for (int i = 0; i < dim_; ++i)
    for (int jj = i + 1; jj < dim_; ++jj)
      for (int k = 0; k < dim_; ++k) {
        const Rational& v = c(i, jj, k);
        if (sgn(v) == 0) continue;
        j["c"].push_back({i + 1, jj + 1, k + 1, v.get_num().get_si(), v.get_den().get_si()});
      }
  return j;
}

QPolyVector kks_bivector(const LieAlgebra& L) {
  const int r = L.dim();
  QPolyVector pi(r, std::min(2, r));
  if (r < 2) return pi;
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      QPoly p(r);
      for (int k = 0; k < r; ++k) p.add_term(Monomial::unit(k), L.c(i, j, k));
      pi.add((Mask{1} << i) | (Mask{1} << j), p);
    }
  return pi;
}

// ---------------------------------------------------------------------------

UEAElement UEAElement::word(const PbwWord& w, const Rational& c) {
  UEAElement e;
  e.add(w, c);
  return e;
}

int UEAElement::degree() const {
  int d = 0;
  for (const auto& [w, c] : terms_) d = std::max(d, static_cast<int>(w.size()));
  return d;
}

void UEAElement::add(const PbwWord& w, const Rational& c) {
  if (sgn(c) == 0) return;
  auto [it, fresh] = terms_.emplace(w, c);
  if (!fresh) {
    it->second += c;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

UEAElement& UEAElement::operator+=(const UEAElement& o) {
  for (const auto& [w, c] : o.terms_) add(w, c);
  return *this;
}

UEAElement& UEAElement::operator-=(const UEAElement& o) {
  for (const auto& [w, c] : o.terms_) add(w, -c);
  return *this;
}

UEAElement operator*(const Rational& s, const UEAElement& a) {
  UEAElement r;
  for (const auto& [w, c] : a.terms_) r.add(w, s * c);
  return r;
}

std::string UEAElement::to_string() const {
  if (terms_.empty()) return "0";
  // graded order, highest degree first
  std::vector<std::pair<PbwWord, Rational>> items(terms_.begin(), terms_.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  std::string out;
  for (const auto& [w, c] : items) {
    Rational mag = abs(c);
    std::string word;
    for (std::size_t i = 0; i < w.size();) {
      std::size_t j = i;
      while (j < w.size() && w[j] == w[i]) ++j;
      if (!word.empty()) word += "*";
      word += "x" + std::to_string(w[i] + 1);
      if (j - i > 1) word += "^" + std::to_string(j - i);
      i = j;
    }
    std::string term;
    if (word.empty())
      term = mag.get_str();
    else if (mag == 1)
      term = word;
    else
      term = mag.get_str() + "*" + word;
    if (out.empty())
      out = sgn(c) < 0 ? "-" + term : term;
    else
      out += (sgn(c) < 0 ? " - " : " + ") + term;
  }
  return out;
}

UEAElement UEA::generator(int i) const {
  if (i < 0 || i >= L_.dim()) throw ValidationError("UEA: generator index out of range");
  return UEAElement::word({static_cast<std::uint8_t>(i)});
}

UEAElement UEA::normal_order(const PbwWord& w) const {
  std::size_t i = 0;
  while (i + 1 < w.size() && w[i] <= w[i + 1]) ++i;
  if (i + 1 >= w.size()) return UEAElement::word(w);
  auto it = memo_.find(w);
  if (it != memo_.end()) return it->second;
  // u a b v = u b a v + u [a,b] v
  const int a = w[i], b = w[i + 1];
  PbwWord swapped = w;
  std::swap(swapped[i], swapped[i + 1]);
  UEAElement out = normal_order(swapped);
  for (int k = 0; k < L_.dim(); ++k) {
    const Rational& c = L_.c(a, b, k);
    if (sgn(c) == 0) continue;
    PbwWord shorter(w.begin(), w.begin() + static_cast<long>(i));
    shorter.push_back(static_cast<std::uint8_t>(k));
    shorter.insert(shorter.end(), w.begin() + static_cast<long>(i) + 2, w.end());
    out += c * normal_order(shorter);
  }
  memo_.emplace(w, out);
  return out;
}

UEAElement UEA::product(const UEAElement& a, const UEAElement& b) const {
  UEAElement out;
  for (const auto& [wa, ca] : a.terms())
    for (const auto& [wb, cb] : b.terms()) {
      PbwWord w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out += (ca * cb) * normal_order(w);
    }
  return out;
}

UEAElement UEA::commutator(const UEAElement& a, const UEAElement& b) const {
  return product(a, b) - product(b, a);
}

std::vector<PbwWord> UEA::basis(int k) const {
  std::vector<PbwWord> out;
  for (const auto& m : monomials_up_to(L_.dim(), k)) out.push_back(word_of(m, L_.dim()));
  return out;
}

std::size_t UEA::basis_size(int k) const { return basis(k).size(); }

UEAElement sym(const UEA& U, const QPoly& p) {
  const int r = U.algebra().dim();
  UEAElement out;
  for (const auto& [m, c] : p.terms()) {
    PbwWord w = word_of(m, r);
    UEAElement acc;
    long count = 0;
    do {
      acc += U.normal_order(w);
      ++count;
    } while (std::next_permutation(w.begin(), w.end()));
    out += (c / Rational(count)) * acc;
  }
  return out;
}

std::vector<Rational> log_sinhc_series(int degree) {
  // sinh(t/2)/(t/2) = sum (t/2)^{2n} / (2n+1)!
  std::vector<Rational> s(static_cast<std::size_t>(degree + 1), Rational(0));
  Rational fact = 1;
  for (int k = 0; k <= degree; ++k) {
    if (k > 0) fact *= (k + 1);
    if (k % 2 == 0) {
      Rational pow2 = 1;
      for (int t = 0; t < k; ++t) pow2 *= 2;
      s[k] = 1 / (pow2 * fact);
    }
  }
  // log(1+u), u = s - 1
  std::vector<Rational> u = s;
  u[0] = 0;
  std::vector<Rational> out(u.size(), Rational(0)), pw(u.size(), Rational(0));
  pw[0] = 1;
  for (int n = 1; n <= degree; ++n) {
    std::vector<Rational> next(u.size(), Rational(0));
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) next[a + b] += pw[a] * u[b];
    pw = next;
    Rational f = Rational(n % 2 ? 1 : -1) / n;
    for (int k = 0; k <= degree; ++k) out[k] += f * pw[k];
  }
  return out;
}

DufloTruncation duflo_J(const LieAlgebra& L, int max_degree) {
  if (max_degree < 0) throw ValidationError("duflo_J: negative degree");
  const int r = L.dim();
  DufloTruncation t;
  t.max_degree = max_degree;
  // (ad_xi)^k_j = sum_i xi_i c^k_{ij}
  std::vector<std::vector<QPoly>> ad(r, std::vector<QPoly>(r, QPoly(r)));
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) ad[k][j].add_term(Monomial::unit(i), L.c(i, j, k));
  auto beta = log_sinhc_series(max_degree);
  t.log_J = QPoly(r);
  auto pw = ad;
  for (int e = 2; e <= max_degree; ++e) {
    std::vector<std::vector<QPoly>> next(r, std::vector<QPoly>(r, QPoly(r)));
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c) next[a][b] += pw[a][c] * ad[c][b];
    pw = std::move(next);
    if (sgn(beta[e]) == 0) continue;
    QPoly tr(r);
    for (int a = 0; a < r; ++a) tr += pw[a][a];
    t.log_J += tr * beta[e];
  }
  t.J = exp_truncated(t.log_J, max_degree);
  t.J_half = exp_truncated(t.log_J * q(1, 2), max_degree);
  return t;
}

UEAElement duflo_map(const UEA& U, const DufloTruncation& J, const QPoly& p) {
  if (p.degree() > J.max_degree)
    throw ValidationError("duflo_map: input degree " + std::to_string(p.degree()) +
                          " exceeds the truncation degree " + std::to_string(J.max_degree));
  QPoly acted(p.dim());
  for (const auto& [beta, c] : J.J_half.terms()) acted += p.derivative(beta) * c;
  return sym(U, acted);
}

std::vector<QPoly> invariants(const LieAlgebra& L, int degree) {
  const int r = L.dim();
  std::vector<Monomial> basis;
  for (const auto& m : monomials_up_to(r, degree))
    if (m.degree() == degree) basis.push_back(m);
  std::map<std::pair<int, Monomial>, int> rows;
  std::vector<std::vector<std::pair<int, Rational>>> cols;
  for (const auto& m : basis) {
    QPoly p = QPoly::monomial(r, m, 1);
    std::vector<std::pair<int, Rational>> col;
    for (int i = 0; i < r; ++i) {
      // x_i . p = sum_{j,k} c^k_{ij} x_k d_j p
      QPoly act(r);
      for (int j = 0; j < r; ++j) {
        QPoly dp = p.derivative(j);
        if (dp.is_zero()) continue;
        for (int k = 0; k < r; ++k)
          if (sgn(L.c(i, j, k)) != 0) act += QPoly::variable(r, k) * dp * L.c(i, j, k);
      }
      for (const auto& [mono, c] : act.terms()) {
        auto [it, fresh] = rows.emplace(std::make_pair(i, mono), static_cast<int>(rows.size()));
        col.emplace_back(it->second, c);
      }
    }
    cols.push_back(std::move(col));
  }
  std::vector<QVector> mat(rows.size(), QVector(basis.size(), Rational(0)));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (const auto& [row, c] : cols[j]) mat[row][j] = c;
  std::vector<QPoly> out;
  for (const auto& v : kernel(mat, static_cast<int>(basis.size()))) {
    QPoly p(r);
    for (std::size_t j = 0; j < basis.size(); ++j) p.add_term(basis[j], v[j]);
    out.push_back(p);
  }
  return out;
}

CommutatorSpace::CommutatorSpace(const UEA& U, int k) {
  auto words = U.basis(k);
  for (std::size_t i = 0; i < words.size(); ++i) index_.emplace(words[i], static_cast<int>(i));
  span_ = RationalSpan(static_cast<int>(words.size()));
  for (int g = 0; g < U.algebra().dim(); ++g)
    for (const auto& w : words) {
      auto c = U.commutator(U.generator(g), UEAElement::word(w));
      if (!c.is_zero()) span_.add(coords(c));
    }
}

std::vector<Rational> CommutatorSpace::coords(const UEAElement& u) const {
  QVector v(index_.size(), Rational(0));
  for (const auto& [w, c] : u.terms()) {
    auto it = index_.find(w);
    if (it == index_.end()) throw ValidationError("element exceeds the commutator space degree");
    v[it->second] = c;
  }
  return v;
}

bool CommutatorSpace::contains(const UEAElement& u) const { return span_.contains(coords(u)); }

nlohmann::json DufloReport::to_json() const {
  nlohmann::json j{{"algebra", algebra},
                   {"degree", degree},
                   {"exact", true},
                   {"j_half_squared", j_half_squared},
                   {"invariants", invariant_count},
                   {"algebra_checks", algebra_checks},
                   {"algebra_failures", algebra_failures},
                   {"central_checks", central_checks},
                   {"central_failures", central_failures},
                   {"module_checks", module_checks},
                   {"module_failures", module_failures},
                   {"pass", pass}};
  if (!counterexample.empty()) j["counterexample"] = counterexample;
  return j;
}

DufloReport duflo_theorem_check(const LieAlgebra& L, int degree) {
  DufloReport rep;
  rep.algebra = L.name();
  rep.degree = degree;
  const int r = L.dim();
  UEA U(L);
  auto J = duflo_J(L, degree);
  rep.j_half_squared = truncate(J.J_half * J.J_half, degree) == J.J;

  std::vector<QPoly> inv;
  for (int d = 1; d <= degree; ++d)
    for (auto& p : invariants(L, d)) inv.push_back(std::move(p));
  rep.invariant_count = static_cast<int>(inv.size());
  auto D = [&](const QPoly& p) { return duflo_map(U, J, p); };
  auto note = [&](const std::string& what, const QPoly& p, const QPoly& qq) {
    if (rep.counterexample.empty()) rep.counterexample = what + ": p = " + p.to_string() + ", q = " + qq.to_string();
  };

  for (std::size_t a = 0; a < inv.size(); ++a) {
    auto Dp = D(inv[a]);
    for (int g = 0; g < r; ++g) {
      ++rep.central_checks;
      if (!U.commutator(Dp, U.generator(g)).is_zero()) {
        ++rep.central_failures;
        note("not central", inv[a], QPoly::variable(r, g));
      }
    }
    for (std::size_t b = a; b < inv.size(); ++b) {
      if (inv[a].degree() + inv[b].degree() > degree) continue;
      ++rep.algebra_checks;
      if (D(inv[a] * inv[b]) != U.product(Dp, D(inv[b]))) {
        ++rep.algebra_failures;
        note("not multiplicative", inv[a], inv[b]);
      }
    }
  }

  CommutatorSpace comm(U, degree);
  for (const auto& p : inv) {
    auto Dp = D(p);
    for (const auto& m : monomials_up_to(r, degree - p.degree())) {
      QPoly qq = QPoly::monomial(r, m, 1);
      ++rep.module_checks;
      auto diff = D(p * qq) - U.product(Dp, D(qq));
      if (!comm.contains(diff)) {
        ++rep.module_failures;
        note("not in [U,U]", p, qq);
      }
    }
  }
  rep.pass = rep.j_half_squared && rep.algebra_failures == 0 && rep.central_failures == 0 &&
             rep.module_failures == 0;
  return rep;
}

nlohmann::json MorphismReport::to_json() const {
  return {{"defect", defect}, {"error", error}, {"tolerance", tolerance}, {"pass", pass}};
}

MorphismReport morphism_I_check(const LieAlgebra& L, const StarProduct& S, double tolerance) {
  const int r = L.dim();
  const auto& A = S.algebra;
  MorphismReport rep;
  rep.tolerance = tolerance;
  rep.defect.assign(A.order() + 1, 0.0);
  rep.error.assign(A.order() + 1, 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      APoly xi = APoly::variable(r, i), xj = APoly::variable(r, j);
      auto ab = A.star(xi, xj), ba = A.star(xj, xi);
      for (int k = 0; k <= A.order(); ++k) {
        APoly d = ab[k] - ba[k];
        if (k == 1)
          for (int t = 0; t < r; ++t)
            if (sgn(L.c(i, j, t)) != 0) d -= APoly::variable(r, t) * Approx(L.c(i, j, t));
        rep.defect[k] = std::max(rep.defect[k], d.max_abs());
        rep.error[k] = std::max(rep.error[k], d.max_error());
      }
    }
  rep.pass = true;
  for (int k = 0; k <= A.order(); ++k)
    rep.pass = rep.pass && rep.defect[k] <= std::max(tolerance, 4 * rep.error[k]);
  return rep;
}

}  // namespace fkit
