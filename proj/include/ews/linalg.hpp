#pragma once

#include <cstddef>
#include <vector>

namespace ews {

// Dense row-major matrix of doubles. Deliberately small: the library works
// with operators of a few rows and with flattened step matrices up to a few
// thousand rows, so a flat vector plus index arithmetic is all that is needed.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows*cols entries

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> d);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const std::vector<double>& d);

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool square() const { return rows == cols; }
  bool finite() const;
  bool is_diagonal(double tol = 0.0) const;
  bool is_zero(double tol = 0.0) const;

  Matrix transpose() const;
  std::vector<double> diag() const;
};

bool operator==(const Matrix& a, const Matrix& b);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix operator*(const Matrix& a, double s);

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

// Solves A X = B via LU with partial pivoting (A square, B may have any
// column count). Throws ews::error on singular pivots.
Matrix lu_solve(Matrix a, Matrix b);

// Solves the SPD system A x = b via Cholesky. Throws on non-positive pivots.
std::vector<double> cholesky_solve(Matrix a, std::vector<double> b);

double one_norm(const Matrix& a);   // max column sum
double inf_norm(const Matrix& a);   // max row sum
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

// Largest singular value (via Eigen internally).
double spectral_norm(const Matrix& a);

Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace ews
