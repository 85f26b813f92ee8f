#include "qroute/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qroute::kernels {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*hadamard)(const double*, const double*, double*, std::size_t);
  Isa isa;
};

constexpr Table kScalar{dot_scalar, axpy_scalar, hadamard_scalar, Isa::Scalar};

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(QROUTE_BUILD_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(QROUTE_BUILD_NEON)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Table table_for(Isa isa) {
  if (!isa_available(isa)) return kScalar;
  switch (isa) {
#if defined(QROUTE_BUILD_AVX2)
    case Isa::Avx2:
      return {dot_avx2, axpy_avx2, hadamard_avx2, Isa::Avx2};
#endif
#if defined(QROUTE_BUILD_NEON)
    case Isa::Neon:
      return {dot_neon, axpy_neon, hadamard_neon, Isa::Neon};
#endif
    default:
      return kScalar;
  }
}

Isa detect() {
  if (const char* env = std::getenv("QROUTE_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0) return Isa::Avx2;
    if (std::strcmp(env, "neon") == 0) return Isa::Neon;
  }
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Table g_table = table_for(detect());

}  // namespace

Isa active_isa() { return g_table.isa; }

void set_isa(Isa isa) { g_table = table_for(isa); }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_table.dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  g_table.axpy(alpha, x, y, n);
}

void hadamard(const double* a, const double* b, double* out, std::size_t n) {
  g_table.hadamard(a, b, out, n);
}

}  // namespace qroute::kernels
