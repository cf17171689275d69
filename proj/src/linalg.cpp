#include "fkit/linalg.hpp"

#include "fkit/errors.hpp"

namespace fkit {

QVector RationalSpan::reduce(QVector v) const {
  if (static_cast<int>(v.size()) != n_) throw ValidationError("span: vector length mismatch");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const Rational& c = v[pivots_[r]];
    if (sgn(c) == 0) continue;
    Rational f = c;
    for (int j = pivots_[r]; j < n_; ++j)
      if (sgn(rows_[r][j]) != 0) v[j] -= f * rows_[r][j];
  }
  return v;
}

bool RationalSpan::contains(QVector v) const {
  for (const auto& x : reduce(std::move(v)))
    if (sgn(x) != 0) return false;
  return true;
}

bool RationalSpan::add(QVector v) {
  v = reduce(std::move(v));
  int p = 0;
  while (p < n_ && sgn(v[p]) == 0) ++p;
  if (p == n_) return false;
  Rational inv = 1 / v[p];
  for (int j = p; j < n_; ++j) v[j] *= inv;
  // keep rows fully reduced so reduce() can eliminate in one pass
  for (auto& row : rows_) {
    Rational f = row[p];
    if (sgn(f) == 0) continue;
    for (int j = p; j < n_; ++j) row[j] -= f * v[j];
  }
  rows_.push_back(std::move(v));
  pivots_.push_back(p);
  return true;
}

std::vector<QVector> kernel(const std::vector<QVector>& a, int cols) {
  std::vector<QVector> m = a;
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < static_cast<int>(m.size()); ++c) {
    int p = r;
    while (p < static_cast<int>(m.size()) && sgn(m[p][c]) == 0) ++p;
    if (p == static_cast<int>(m.size())) continue;
    std::swap(m[p], m[r]);
    Rational inv = 1 / m[r][c];
    for (int j = c; j < cols; ++j) m[r][j] *= inv;
    for (int i = 0; i < static_cast<int>(m.size()); ++i) {
      if (i == r || sgn(m[i][c]) == 0) continue;
      Rational f = m[i][c];
      for (int j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<char> is_pivot(cols, 0);
  for (int c : pivot_col) is_pivot[c] = 1;
  std::vector<QVector> out;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    QVector v(cols, Rational(0));
    v[f] = 1;
    for (int i = 0; i < r; ++i) v[pivot_col[i]] = -m[i][f];
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fkit
