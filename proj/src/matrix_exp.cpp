#include "ews/matrix_exp.hpp"

#include <cmath>

#include "ews/errors.hpp"

namespace ews {
namespace {

// Pade numerator coefficients b_0..b_m for the degree-m diagonal approximant.
const double kB3[] = {120.0, 60.0, 12.0, 1.0};
const double kB5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
const double kB7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
const double kB9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                      2162160.0, 110880.0, 3960.0, 90.0, 1.0};
const double kB13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                       1187353796428800.0,  129060195264000.0,   10559470521600.0,
                       670442572800.0,      33522128640.0,       1323241920.0,
                       40840800.0,          960960.0,            16380.0,
                       182.0,               1.0};

// 1-norm thresholds below which the degree-m approximant meets double
// precision backward error.
constexpr double kTheta3 = 1.495585217958292e-02;
constexpr double kTheta5 = 2.539398330063230e-01;
constexpr double kTheta7 = 9.504178996162932e-01;
constexpr double kTheta9 = 2.097847961257068e+00;
constexpr double kTheta13 = 5.371920351148152e+00;

// Evaluates the numerator split U = A*(odd part), V = even part for the
// degree-m approximant, then solves (V-U)F = (V+U).
Matrix pade_solve(const Matrix& a, const double* b, int m) {
  const std::size_t n = a.rows;
  const Matrix eye = Matrix::identity(n);
  const Matrix a2 = a * a;

  Matrix u(n, n), v(n, n);
  if (m <= 9) {
    // Horner on powers of A^2: even = sum b_{2k} (A^2)^k, odd likewise.
    Matrix p = eye;  // (A^2)^k
    u = b[1] * eye;
    v = b[0] * eye;
    for (int k = 1; 2 * k <= m; ++k) {
      p = p * a2;
      if (2 * k + 1 <= m) u = u + b[2 * k + 1] * p;
      v = v + b[2 * k] * p;
    }
    u = a * u;
  } else {
    // Degree 13 uses the factored form with A^2, A^4, A^6.
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    Matrix w1 = b[13] * a6 + b[11] * a4 + b[9] * a2;
    Matrix w2 = b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye;
    u = a * (a6 * w1 + w2);
    Matrix z1 = b[12] * a6 + b[10] * a4 + b[8] * a2;
    v = a6 * z1 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye;
  }
  return lu_solve(v - u, v + u);
}

}  // namespace

Matrix matrix_exp(const Matrix& a) {
  require(a.square(), "matrix_exp: matrix must be square");
  require(a.rows >= 1, "matrix_exp: empty matrix");
  require(a.finite(), "matrix_exp: non-finite entries");

  const double nrm = one_norm(a);
  if (nrm <= kTheta3) return pade_solve(a, kB3, 3);
  if (nrm <= kTheta5) return pade_solve(a, kB5, 5);
  if (nrm <= kTheta7) return pade_solve(a, kB7, 7);
  if (nrm <= kTheta9) return pade_solve(a, kB9, 9);

  int s = 0;
  double scaled = nrm;
  while (scaled > kTheta13) {
    scaled *= 0.5;
    ++s;
  }
  Matrix f = pade_solve(std::ldexp(1.0, -s) * a, kB13, 13);
  for (int i = 0; i < s; ++i) f = f * f;
  return f;
}

}  // namespace ews
