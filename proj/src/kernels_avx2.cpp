#include <immintrin.h>

#include "ews/kernels.hpp"

// AVX2 variants. Every output element is produced by the same multiply/add
// sequence as the scalar reference (vector lanes carry independent output
// elements; reductions stay sequential in the same index; no FMA), so the
// results are bit-identical to scalar_ops(). This file is the only one built
// with -mavx2.

namespace ews::kernels {
namespace {

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_to_avx2(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

void accum_avx2(std::size_t n, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void elem_mul_avx2(std::size_t n, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] *= x[i];
}

void outer_acc_avx2(std::size_t m, std::size_t n, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double ai = a[i];
    const __m256d vai = _mm256_set1_pd(ai);
    double* row = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d vr = _mm256_loadu_pd(row + j);
      vr = _mm256_add_pd(vr, _mm256_mul_pd(vai, _mm256_loadu_pd(b + j)));
      _mm256_storeu_pd(row + j, vr);
    }
    for (; j < n; ++j) row[j] += ai * b[j];
  }
}

void matvec_avx2(std::size_t rows, std::size_t cols, const double* e, const double* x,
                 double* y) {
  std::size_t r = 0;
  // Four output rows per iteration; the k-reduction stays sequential per row.
  for (; r + 4 <= rows; r += 4) {
    __m256d acc = _mm256_setzero_pd();
    const double* r0 = e + r * cols;
    const double* r1 = r0 + cols;
    const double* r2 = r1 + cols;
    const double* r3 = r2 + cols;
    for (std::size_t k = 0; k < cols; ++k) {
      __m256d col = _mm256_set_pd(r3[k], r2[k], r1[k], r0[k]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[k])));
    }
    _mm256_storeu_pd(y + r, acc);
  }
  for (; r < rows; ++r) {
    double acc = 0.0;
    const double* row = e + r * cols;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
    y[r] = acc;
  }
}

void mode_apply_avx2(std::size_t pre, std::size_t w, std::size_t post, const double* e,
                     const double* x, double* y) {
  for (std::size_t p = 0; p < pre; ++p) {
    const double* xp = x + p * w * post;
    double* yp = y + p * w * post;
    for (std::size_t i = 0; i < w; ++i) {
      const double* erow = e + i * w;
      double* yrow = yp + i * post;
      std::size_t q = 0;
      for (; q + 4 <= post; q += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t m = 0; m < w; ++m) {
          __m256d vx = _mm256_loadu_pd(xp + m * post + q);
          acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(erow[m]), vx));
        }
        _mm256_storeu_pd(yrow + q, acc);
      }
      for (; q < post; ++q) {
        double acc = 0.0;
        for (std::size_t m = 0; m < w; ++m) acc += erow[m] * xp[m * post + q];
        yrow[q] = acc;
      }
    }
  }
}

void batch_matvec_avx2(std::size_t count, std::size_t rows, std::size_t cols, const double* mats,
                       const double* x, double* y) {
  for (std::size_t j = 0; j < count; ++j)
    matvec_avx2(rows, cols, mats + j * rows * cols, x, y + j * rows);
}

void gram_acc_avx2(std::size_t m, std::size_t w, const double* u, const double* c, double* out) {
  for (std::size_t j = 0; j < m; ++j) {
    const double* uj = u + j * w;
    const double* cj = c + j * w;
    for (std::size_t a = 0; a < w; ++a) {
      const double ua = uj[a];
      const __m256d vua = _mm256_set1_pd(ua);
      double* row = out + a * w;
      std::size_t b = 0;
      for (; b + 4 <= w; b += 4) {
        __m256d vr = _mm256_loadu_pd(row + b);
        vr = _mm256_add_pd(vr, _mm256_mul_pd(vua, _mm256_loadu_pd(cj + b)));
        _mm256_storeu_pd(row + b, vr);
      }
      for (; b < w; ++b) row[b] += ua * cj[b];
    }
  }
}

}  // namespace

const Ops& avx2_ops_impl() {
  static const Ops table = {
      axpy_avx2,   scale_to_avx2,   accum_avx2,        elem_mul_avx2, outer_acc_avx2,
      matvec_avx2, mode_apply_avx2, batch_matvec_avx2, gram_acc_avx2,
  };
  return table;
}

}  // namespace ews::kernels
