#pragma once

#include <vector>

#include "fkit/scalar.hpp"

namespace fkit {

using QVector = std::vector<Rational>;

/// Incrementally reduced row echelon basis of a subspace of Q^n.
class RationalSpan {
 public:
  explicit RationalSpan(int n) : n_(n) {}

  int ambient() const { return n_; }
  int rank() const { return static_cast<int>(rows_.size()); }

  /// Adds v; returns true when v was independent of the current span.
  bool add(QVector v);
  /// Exact membership test.
  bool contains(QVector v) const;
  /// Remainder of v after reduction by the basis (zero iff v is in the span).
  QVector reduce(QVector v) const;

 private:
  int n_;
  std::vector<QVector> rows_;
  std::vector<int> pivots_;
};

/// Basis of the kernel of the rows x cols matrix `a` (rows given as vectors).
std::vector<QVector> kernel(const std::vector<QVector>& a, int cols);

}  // namespace fkit
