#pragma once

#include <cstddef>

// Dense double-precision kernels behind the embedding trainer and scorer.
// Scalar reference versions are always compiled; wider variants (AVX2 on
// x86-64, NEON on aarch64) are built when the target supports them and
// picked at runtime. dot() results may differ from the scalar path by
// summation order only; axpy/hadamard are elementwise.

namespace qroute::kernels {

enum class Isa { Scalar, Avx2, Neon };

// Currently dispatched instruction set.
Isa active_isa();
const char* isa_name(Isa isa);

// Overrides auto-detection (falls back to Scalar when the requested set was
// not compiled in or the CPU lacks it). The QROUTE_SIMD environment variable
// ("scalar", "avx2", "neon") does the same at process start.
void set_isa(Isa isa);

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void hadamard(const double* a, const double* b, double* out, std::size_t n);

// Reference implementations, exposed for equivalence tests.
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n);

#if defined(QROUTE_BUILD_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void hadamard_avx2(const double* a, const double* b, double* out, std::size_t n);
#endif

#if defined(QROUTE_BUILD_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
void hadamard_neon(const double* a, const double* b, double* out, std::size_t n);
#endif

}  // namespace qroute::kernels
