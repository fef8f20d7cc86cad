#pragma once

#include <cstddef>

// Data-parallel inner loops with scalar reference implementations and AVX2
// variants selected at runtime. The scalar versions are the semantic ground
// truth; the vector paths must agree within floating-point reassociation
// tolerance (tested in tests/test_simd.cpp).
namespace splat::simd {

enum class Backend { kScalar, kAvx2 };

Backend active_backend();
const char* backend_name();

// Testing hook. Forcing kAvx2 on a machine without AVX2 keeps scalar.
void force_backend(Backend b);
void reset_backend(); // back to auto-detect

float dot_f32(const float* a, const float* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

// One Adam step over a flat parameter block, in place.
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   p <- p - lr * (m/bc1) / (sqrt(v/bc2) + eps)
// bc1/bc2 are the bias corrections 1-b1^t, 1-b2^t for the current step t.
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2);

namespace scalar {
float dot_f32(const float* a, const float* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2);
} // namespace scalar

#ifdef SPLAT_WITH_AVX2
namespace avx2 {
float dot_f32(const float* a, const float* b, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2);
} // namespace avx2
#endif

} // namespace splat::simd
