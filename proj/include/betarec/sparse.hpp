#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace betarec {

using Vector = std::vector<double>;

double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);

/// Sparse symmetric positive definite matrix in compressed-row storage.
/// Construction goes through the Builder, which accumulates triplets,
/// verifies symmetry (1e-12 relative) and positive diagonal entries.
class SparseSpdMatrix {
 public:
  SparseSpdMatrix() = default;  // empty (dim 0) placeholder

  class Builder {
   public:
    explicit Builder(int n);
    void add(int row, int col, double value);
    SparseSpdMatrix build() &&;

   private:
    int n_;
    std::vector<std::vector<std::pair<int, double>>> rows_;
  };

  int dim() const { return n_; }
  const Vector& diagonal() const { return diag_; }

  void multiply(const Vector& x, Vector& y) const;
  Vector multiply(const Vector& x) const;

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const Vector& values() const { return values_; }

 private:
  int n_ = 0;
  std::vector<int> row_offsets_;
  std::vector<int> col_indices_;
  Vector values_;
  Vector diag_;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients.  Guarantees
/// ||A x - b||_2 <= rel_tol * ||b||_2 on return; throws std::runtime_error
/// with the achieved residual after 10*n iterations without convergence.
Vector solve_spd(const SparseSpdMatrix& A, const Vector& b, double rel_tol = 1e-12,
                 SolveStats* stats = nullptr);

}  // namespace betarec
