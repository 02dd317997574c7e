#include "ews/kernels.hpp"

// Reference kernels. The loop structure here defines the contract: the AVX2
// variant must produce every output element with exactly this operation
// order (reductions run over the same index sequentially; no FMA).

namespace ews::kernels {
namespace {

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_to_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void accum_scalar(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

void elem_mul_scalar(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= x[i];
}

void outer_acc_scalar(std::size_t m, std::size_t n, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double ai = a[i];
    double* row = c + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += ai * b[j];
  }
}

void matvec_scalar(std::size_t rows, std::size_t cols, const double* e, const double* x,
                   double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* row = e + r * cols;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
    y[r] = acc;
  }
}

void mode_apply_scalar(std::size_t pre, std::size_t w, std::size_t post, const double* e,
                       const double* x, double* y) {
  for (std::size_t p = 0; p < pre; ++p) {
    const double* xp = x + p * w * post;
    double* yp = y + p * w * post;
    for (std::size_t i = 0; i < w; ++i) {
      const double* erow = e + i * w;
      double* yrow = yp + i * post;
      for (std::size_t q = 0; q < post; ++q) {
        double acc = 0.0;
        for (std::size_t m = 0; m < w; ++m) acc += erow[m] * xp[m * post + q];
        yrow[q] = acc;
      }
    }
  }
}

void batch_matvec_scalar(std::size_t count, std::size_t rows, std::size_t cols,
                         const double* mats, const double* x, double* y) {
  for (std::size_t j = 0; j < count; ++j)
    matvec_scalar(rows, cols, mats + j * rows * cols, x, y + j * rows);
}

void gram_acc_scalar(std::size_t m, std::size_t w, const double* u, const double* c,
                     double* out) {
  for (std::size_t j = 0; j < m; ++j) {
    const double* uj = u + j * w;
    const double* cj = c + j * w;
    for (std::size_t a = 0; a < w; ++a) {
      const double ua = uj[a];
      double* row = out + a * w;
      for (std::size_t b = 0; b < w; ++b) row[b] += ua * cj[b];
    }
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      axpy_scalar,   scale_to_scalar,     accum_scalar,        elem_mul_scalar, outer_acc_scalar,
      matvec_scalar, mode_apply_scalar, batch_matvec_scalar, gram_acc_scalar,
  };
  return table;
}

}  // namespace ews::kernels
