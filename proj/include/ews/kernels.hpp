#pragma once

#include <cstddef>

namespace ews::kernels {

// Data-parallel inner loops used by the tensor and scan code. Two variants
// exist: a scalar reference and an AVX2 one. Both compute every output
// element with the same operation sequence and no fused multiply-add, so
// their results are bit-identical; the equivalence tests assert exact
// equality. Dispatch is resolved once at startup (overridable for tests and
// via the CLI).
struct Ops {
  // y[i] += a * x[i]
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // y[i] = a * x[i]
  void (*scale_to)(std::size_t n, double a, const double* x, double* y);
  // y[i] += x[i]
  void (*accum)(std::size_t n, const double* x, double* y);
  // y[i] *= x[i]
  void (*elem_mul)(std::size_t n, const double* x, double* y);
  // c[i*n + j] += a[i] * b[j]
  void (*outer_acc)(std::size_t m, std::size_t n, const double* a, const double* b, double* c);
  // y[r] = sum_k e[r*cols + k] * x[k]
  void (*matvec)(std::size_t rows, std::size_t cols, const double* e, const double* x, double* y);
  // y[p, i, q] = sum_m e[i*w + m] * x[p, m, q]   (x is pre x w x post)
  void (*mode_apply)(std::size_t pre, std::size_t w, std::size_t post, const double* e,
                     const double* x, double* y);
  // y_j = M_j x, where mats holds `count` row-major rows x cols blocks
  void (*batch_matvec)(std::size_t count, std::size_t rows, std::size_t cols, const double* mats,
                       const double* x, double* y);
  // out[a*w + b] += sum_j u[j*w + a] * c[j*w + b]   (both u and c are m x w)
  void (*gram_acc)(std::size_t m, std::size_t w, const double* u, const double* c, double* out);
};

enum class Variant { scalar, avx2 };

const Ops& scalar_ops();
const Ops& avx2_ops();  // equal to scalar_ops() in builds without AVX2 support

bool avx2_compiled();
bool avx2_supported();  // compiled in and available on this CPU

// Active table used by the library. set_variant(avx2) silently falls back to
// scalar when unsupported; set_variant_auto() picks the best available.
const Ops& ops();
Variant active_variant();
void set_variant(Variant v);
void set_variant_auto();
const char* variant_name(Variant v);

}  // namespace ews::kernels
