#pragma once

#include <vector>

#include "mbf/errors.hpp"

namespace mbf {

using Vec = std::vector<double>;

// Dense row-major matrix. Only the small handful of operations the
// statistics code needs; dimensions here are tiny (p <= ~50).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Vec& data() { return data_; }
  const Vec& data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vec data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Vec matvec(const Matrix& a, const Vec& v);
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);

// Symmetric positive definite matrix of fixed dimension.
// Symmetry is a construction invariant (set() writes both triangles,
// from_matrix() rejects asymmetry beyond 1e-12 relative tolerance).
// Positive definiteness is checked operationally: cholesky() succeeds.
class SpdMatrix {
 public:
  explicit SpdMatrix(int dim);
  static SpdMatrix identity(int dim);
  // Validates symmetry to within 1e-12 relative tolerance, then stores
  // the symmetrized entries.
  static SpdMatrix from_matrix(const Matrix& m);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
  // Writes both (i,j) and (j,i).
  void set(int i, int j, double v);

  Matrix to_matrix() const;
  const Vec& data() const { return data_; }

 private:
  int dim_ = 0;
  Vec data_;
};

// Lower-triangular Cholesky factor L with L L^T = m.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Matrix lower) : l_(std::move(lower)) {}

  const Matrix& lower() const { return l_; }
  // Solves L w = b by forward substitution.
  Vec solve_lower(const Vec& b) const;
  // Solves (L L^T) x = b.
  Vec solve(const Vec& b) const;
  // Solves (L L^T) X = B column by column.
  Matrix solve_matrix(const Matrix& b) const;

 private:
  Matrix l_;
};

// Throws NotPositiveDefinite if any pivot is <= 0.
CholeskyFactor cholesky(const SpdMatrix& m);

// v^T m^{-1} v computed through the Cholesky factor. Nonnegative, and
// zero exactly when v = 0.
double quad_form_inv(const Vec& v, const SpdMatrix& m);
double quad_form_inv(const Vec& v, const CholeskyFactor& chol);

// Eigendecomposition of a symmetric matrix: values sorted descending
// (ties keep original index order), vectors as orthonormal columns.
struct EigenDecomp {
  Vec values;
  Matrix vectors;
};

// Cyclic Jacobi rotations; off-diagonal Frobenius tolerance 1e-12
// relative to the input norm, at most 100 sweeps.
EigenDecomp sym_eigen(const SpdMatrix& m);

double trace(const Matrix& m);
double trace(const SpdMatrix& m);
// tr(a b); requires a.cols == b.rows and b.cols == a.rows.
double trace_product(const Matrix& a, const Matrix& b);
double trace_product(const SpdMatrix& a, const SpdMatrix& b);

// alpha * a + beta * b
SpdMatrix mat_add_scaled(const SpdMatrix& a, double alpha, const SpdMatrix& b, double beta);
SpdMatrix scaled(const SpdMatrix& a, double c);

}  // namespace mbf
