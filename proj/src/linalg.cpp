#include "ews/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <utility>

#include "ews/errors.hpp"

namespace ews {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> d)
    : rows(r), cols(c), data(std::move(d)) {
  require(data.size() == rows * cols, "Matrix: data length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const std::vector<double>& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
  return m;
}

bool Matrix::finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

bool Matrix::is_diagonal(double tol) const {
  if (!square()) return false;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (i != j && std::abs(at(i, j)) > tol) return false;
  return true;
}

bool Matrix::is_zero(double tol) const {
  for (double v : data)
    if (std::abs(v) > tol) return false;
  return true;
}

Matrix Matrix::transpose() const {
  Matrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
  return t;
}

std::vector<double> Matrix::diag() const {
  std::size_t n = rows < cols ? rows : cols;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.rows == b.rows && a.cols == b.cols, "matrix add: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require(a.rows == b.rows && a.cols == b.cols, "matrix subtract: shape mismatch");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols == b.rows, "matrix multiply: shape mismatch");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.data[k * b.cols];
      double* crow = &c.data[i * c.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data) v *= s;
  return c;
}

Matrix operator*(const Matrix& a, double s) { return s * a; }

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  require(a.cols == x.size(), "matvec: shape mismatch");
  std::vector<double> y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    const double* row = &a.data[i * a.cols];
    for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Matrix lu_solve(Matrix a, Matrix b) {
  require(a.square(), "lu_solve: matrix must be square");
  require(a.rows == b.rows, "lu_solve: right-hand side has wrong row count");
  const std::size_t n = a.rows;
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a.at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = std::abs(a.at(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    require(best > 0.0 && std::isfinite(best), "lu_solve: singular or non-finite pivot");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(p, j));
      for (std::size_t j = 0; j < b.cols; ++j) std::swap(b.at(k, j), b.at(p, j));
    }
    const double pivot = a.at(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a.at(i, k) / pivot;
      a.at(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
      for (std::size_t j = 0; j < b.cols; ++j) b.at(i, j) -= f * b.at(k, j);
    }
  }
  // back substitution
  for (std::size_t kk = n; kk-- > 0;) {
    const double pivot = a.at(kk, kk);
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = b.at(kk, j);
      for (std::size_t m = kk + 1; m < n; ++m) acc -= a.at(kk, m) * b.at(m, j);
      b.at(kk, j) = acc / pivot;
    }
  }
  return b;
}

std::vector<double> cholesky_solve(Matrix a, std::vector<double> b) {
  require(a.square() && a.rows == b.size(), "cholesky_solve: shape mismatch");
  const std::size_t n = a.rows;
  // lower-triangular factor stored in place
  for (std::size_t j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
    require(d > 0.0 && std::isfinite(d), "cholesky_solve: matrix not positive definite");
    double l = std::sqrt(d);
    a.at(j, j) = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= a.at(i, k) * a.at(j, k);
      a.at(i, j) = v / l;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double acc = b[i];
    for (std::size_t k = 0; k < i; ++k) acc -= a.at(i, k) * b[k];
    b[i] = acc / a.at(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= a.at(k, ii) * b[k];
    b[ii] = acc / a.at(ii, ii);
  }
  return b;
}

double one_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) s += std::abs(a.at(i, j));
    if (s > best) best = s;
  }
  return best;
}

double inf_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += std::abs(a.at(i, j));
    if (s > best) best = s;
  }
  return best;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double best = 0.0;
  for (double v : a.data) best = std::max(best, std::abs(v));
  return best;
}

double spectral_norm(const Matrix& a) {
  if (a.rows == 0 || a.cols == 0) return 0.0;
  Eigen::MatrixXd m(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a.at(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      double aij = a.at(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows; ++k)
        for (std::size_t l = 0; l < b.cols; ++l)
          c.at(i * b.rows + k, j * b.cols + l) = aij * b.at(k, l);
    }
  return c;
}

}  // namespace ews
