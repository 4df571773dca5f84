#include "betarec/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace betarec {

double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("dot: dimension mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

SparseSpdMatrix::Builder::Builder(int n) : n_(n), rows_(n > 0 ? n : 0) {
  if (n <= 0) throw std::invalid_argument("SparseSpdMatrix: dimension must be positive");
}

void SparseSpdMatrix::Builder::add(int row, int col, double value) {
  if (row < 0 || row >= n_ || col < 0 || col >= n_) {
    throw std::invalid_argument("SparseSpdMatrix: entry out of range");
  }
  rows_[row].emplace_back(col, value);
}

SparseSpdMatrix SparseSpdMatrix::Builder::build() && {
  SparseSpdMatrix m;
  m.n_ = n_;
  m.row_offsets_.assign(n_ + 1, 0);

  // Sort and merge duplicate entries per row.
  for (auto& row : rows_) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (out > 0 && row[out - 1].first == row[i].first) {
        row[out - 1].second += row[i].second;
      } else {
        row[out++] = row[i];
      }
    }
    row.resize(out);
  }

  std::size_t nnz = 0;
  for (const auto& row : rows_) nnz += row.size();
  m.col_indices_.reserve(nnz);
  m.values_.reserve(nnz);
  m.diag_.assign(n_, 0.0);

  for (int r = 0; r < n_; ++r) {
    for (const auto& [c, v] : rows_[r]) {
      m.col_indices_.push_back(c);
      m.values_.push_back(v);
      if (c == r) m.diag_[r] = v;
    }
    m.row_offsets_[r + 1] = static_cast<int>(m.col_indices_.size());
  }

  auto entry = [&m](int r, int c) -> double {
    const auto first = m.col_indices_.begin() + m.row_offsets_[r];
    const auto last = m.col_indices_.begin() + m.row_offsets_[r + 1];
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return m.values_[it - m.col_indices_.begin()];
  };
  for (int r = 0; r < n_; ++r) {
    for (int k = m.row_offsets_[r]; k < m.row_offsets_[r + 1]; ++k) {
      const int c = m.col_indices_[k];
      if (c < r) continue;
      const double v = m.values_[k];
      const double w = entry(c, r);
      const double scale = std::max({std::fabs(v), std::fabs(w), 1e-300});
      if (std::fabs(v - w) > 1e-12 * scale) {
        throw std::invalid_argument("SparseSpdMatrix: non-symmetric entry at (" +
                                    std::to_string(r) + "," + std::to_string(c) + ")");
      }
    }
  }
  for (int r = 0; r < n_; ++r) {
    if (!(m.diag_[r] > 0.0)) {
      throw std::invalid_argument("SparseSpdMatrix: nonpositive diagonal at row " +
                                  std::to_string(r));
    }
  }
  return m;
}

void SparseSpdMatrix::multiply(const Vector& x, Vector& y) const {
  if (static_cast<int>(x.size()) != n_) {
    throw std::invalid_argument("matvec: dimension mismatch");
  }
  y.assign(n_, 0.0);
  for (int r = 0; r < n_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      s += values_[k] * x[col_indices_[k]];
    }
    y[r] = s;
  }
}

Vector SparseSpdMatrix::multiply(const Vector& x) const {
  Vector y;
  multiply(x, y);
  return y;
}

Vector solve_spd(const SparseSpdMatrix& A, const Vector& b, double rel_tol, SolveStats* stats) {
  const int n = A.dim();
  if (static_cast<int>(b.size()) != n) {
    throw std::invalid_argument("solve_spd: dimension mismatch");
  }
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw std::invalid_argument("solve_spd: rel_tol must be in (0,1)");
  }

  const double bnorm = norm2(b);
  Vector x(n, 0.0);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }

  const Vector& diag = A.diagonal();
  Vector r = b;
  Vector z(n);
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  Vector p = z;
  Vector ap(n);
  double rz = dot(r, z);

  const int max_iter = 10 * n;
  const double target = rel_tol * bnorm;
  for (int it = 1; it <= max_iter; ++it) {
    A.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      throw std::runtime_error("solve_spd: matrix is not positive definite (p'Ap = " +
                               std::to_string(pap) + ")");
    }
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    if (norm2(r) <= target) {
      // The recurrence residual can drift; confirm against the true residual
      // and resume from it if they disagree.
      A.multiply(x, ap);
      for (int i = 0; i < n; ++i) ap[i] = b[i] - ap[i];
      const double true_norm = norm2(ap);
      if (true_norm <= target) {
        if (stats) *stats = {it, true_norm / bnorm};
        return x;
      }
      r = ap;
    }
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  Vector ax = A.multiply(x);
  for (int i = 0; i < n; ++i) ax[i] = b[i] - ax[i];
  throw std::runtime_error("solve_spd: no convergence after " + std::to_string(max_iter) +
                           " iterations, achieved relative residual " +
                           std::to_string(norm2(ax) / bnorm));
}

}  // namespace betarec
