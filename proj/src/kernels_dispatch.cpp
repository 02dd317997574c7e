#include "ews/kernels.hpp"

namespace ews::kernels {

#if defined(EWS_BUILD_AVX2)
const Ops& avx2_ops_impl();  // kernels_avx2.cpp
#endif

bool avx2_compiled() {
#if defined(EWS_BUILD_AVX2)
  return true;
#else
  return false;
#endif
}

bool avx2_supported() {
#if defined(EWS_BUILD_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Ops& avx2_ops() {
#if defined(EWS_BUILD_AVX2)
  return avx2_ops_impl();
#else
  return scalar_ops();
#endif
}

namespace {
Variant g_variant = avx2_supported() ? Variant::avx2 : Variant::scalar;
}

const Ops& ops() { return g_variant == Variant::avx2 ? avx2_ops() : scalar_ops(); }

Variant active_variant() { return g_variant; }

void set_variant(Variant v) {
  if (v == Variant::avx2 && !avx2_supported()) v = Variant::scalar;
  g_variant = v;
}

void set_variant_auto() { g_variant = avx2_supported() ? Variant::avx2 : Variant::scalar; }

const char* variant_name(Variant v) { return v == Variant::avx2 ? "avx2" : "scalar"; }

}  // namespace ews::kernels
