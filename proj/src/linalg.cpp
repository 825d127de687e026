#include "hyprown/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace hyprown {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch (" +
                         std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " vs " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols) + ")");
  }
}

}  // namespace

Matrix Matrix::scalar(double v) {
  Matrix m(1, 1);
  m.a[0] = v;
  return m;
}

Matrix Matrix::row(const Vec& v) {
  Matrix m(1, v.size());
  m.a = v;
  return m;
}

Matrix Matrix::col(const Vec& v) {
  Matrix m(v.size(), 1);
  m.a = v;
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const Vec& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Vec Matrix::row_vec(std::size_t i) const {
  return Vec(a.begin() + static_cast<std::ptrdiff_t>(i * cols),
             a.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
}

void Matrix::set_row(std::size_t i, const Vec& v) {
  if (v.size() != cols) throw DimensionError("Matrix::set_row: width mismatch");
  std::copy(v.begin(), v.end(),
            a.begin() + static_cast<std::ptrdiff_t>(i * cols));
}

bool Matrix::all_finite() const {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw DimensionError("matmul: inner dimensions differ (" +
                         std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows) + ")");
  }
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.a[i] += b.a[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "sub");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.a[i] -= b.a[i];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.a) v *= s;
  return c;
}

Vec matvec(const Matrix& a, const Vec& x) {
  if (a.cols != x.size()) throw DimensionError("matvec: size mismatch");
  Vec y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

Matrix cholesky(const Matrix& m) {
  if (m.rows != m.cols) throw DimensionError("cholesky: matrix not square");
  const std::size_t n = m.rows;
  Matrix L(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) {
      throw NumericError("cholesky: matrix not positive definite (pivot " +
                         std::to_string(j) + " = " + format_double(d) + ")");
    }
    L(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

Vec cholesky_solve(const Matrix& L, const Vec& b) {
  const std::size_t n = L.rows;
  if (b.size() != n) throw DimensionError("cholesky_solve: size mismatch");
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * y[k];
    y[i] = s / L(i, i);
  }
  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= L(k, ii) * x[k];
    x[ii] = s / L(ii, ii);
  }
  return x;
}

Matrix cholesky_solve_mat(const Matrix& L, const Matrix& b) {
  if (b.rows != L.rows) {
    throw DimensionError("cholesky_solve_mat: size mismatch");
  }
  Matrix x(b.rows, b.cols);
  Vec col(b.rows);
  for (std::size_t j = 0; j < b.cols; ++j) {
    for (std::size_t i = 0; i < b.rows; ++i) col[i] = b(i, j);
    Vec sol = cholesky_solve(L, col);
    for (std::size_t i = 0; i < b.rows; ++i) x(i, j) = sol[i];
  }
  return x;
}

double cholesky_logdet(const Matrix& L) {
  double s = 0.0;
  for (std::size_t i = 0; i < L.rows; ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

Matrix cholesky_inverse(const Matrix& L) {
  const std::size_t n = L.rows;
  Matrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    Vec x = cholesky_solve(L, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (m.rows != m.cols) throw DimensionError("symmetric_eigen: not square");
  const std::size_t n = m.rows;
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  SymmetricEigen out;
  out.values.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Vec diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace hyprown
