// Eigenvalue extraction for reporting. Eigen is used here only; everything
// numerical in the scan pipeline is hand-rolled for bit-reproducibility.
#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "ews/errors.hpp"
#include "ews/linalg.hpp"

namespace ews {

std::vector<std::complex<double>> eigenvalues_sorted(const Matrix& a) {
  require(a.square(), "eigenvalues: matrix must be square");
  const auto n = static_cast<Eigen::Index>(a.rows);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = a.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  require(solver.info() == Eigen::Success, "eigenvalues: solver failed to converge");
  std::vector<std::complex<double>> out(a.rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    double re = solver.eigenvalues()[i].real();
    double im = solver.eigenvalues()[i].imag();
    if (re == 0.0) re = 0.0;  // normalize -0.0
    if (im == 0.0) im = 0.0;
    out[static_cast<std::size_t>(i)] = {re, im};
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return out;
}

}  // namespace ews
