#pragma once

#include "hyprown/common.hpp"

namespace hyprown {

// Dense row-major matrix. Doubles as the value type of autodiff nodes,
// so vectors are represented as 1xN (row) or Nx1 (column) matrices.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  static Matrix scalar(double v);
  static Matrix row(const Vec& v);
  static Matrix col(const Vec& v);
  static Matrix identity(std::size_t n);
  static Matrix diag(const Vec& d);

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }
  std::size_t size() const { return a.size(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  Vec row_vec(std::size_t i) const;
  void set_row(std::size_t i, const Vec& v);
  bool all_finite() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Vec matvec(const Matrix& a, const Vec& x);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

// Lower-triangular L with L L^T = A. Throws NumericError if A is not
// positive definite.
Matrix cholesky(const Matrix& a);
Vec cholesky_solve(const Matrix& L, const Vec& b);
Matrix cholesky_solve_mat(const Matrix& L, const Matrix& b);
double cholesky_logdet(const Matrix& L);
Matrix cholesky_inverse(const Matrix& L);

// Cyclic Jacobi eigendecomposition for small symmetric matrices.
// Eigenvalues descending; eigenvectors(:,k) matches eigenvalue k.
struct SymmetricEigen {
  Vec values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& a);

}  // namespace hyprown
