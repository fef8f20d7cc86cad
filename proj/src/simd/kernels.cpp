#include "splat/simd/kernels.hpp"

#include <cmath>

namespace splat::simd {

namespace scalar {

float dot_f32(const float* a, const float* b, std::size_t n) {
    float acc = 0.f;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
    return acc;
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(SPLAT_WITH_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend detect() {
    return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

Backend g_backend = detect();

} // namespace

Backend active_backend() { return g_backend; }

const char* backend_name() {
    return g_backend == Backend::kAvx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (b == Backend::kAvx2 && !cpu_has_avx2()) b = Backend::kScalar;
    g_backend = b;
}

void reset_backend() { g_backend = detect(); }

#ifdef SPLAT_WITH_AVX2
#define SPLAT_DISPATCH(fn, ...) \
    return g_backend == Backend::kAvx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#define SPLAT_DISPATCH_VOID(fn, ...)                     \
    do {                                                 \
        if (g_backend == Backend::kAvx2)                 \
            avx2::fn(__VA_ARGS__);                       \
        else                                             \
            scalar::fn(__VA_ARGS__);                     \
    } while (0)
#else
#define SPLAT_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#define SPLAT_DISPATCH_VOID(fn, ...) scalar::fn(__VA_ARGS__)
#endif

float dot_f32(const float* a, const float* b, std::size_t n) {
    SPLAT_DISPATCH(dot_f32, a, b, n);
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    SPLAT_DISPATCH(sum_abs_diff, a, b, n);
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    SPLAT_DISPATCH(sum_sq_diff, a, b, n);
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double eps, double bc1, double bc2) {
    SPLAT_DISPATCH_VOID(adam_update, p, g, m, v, n, lr, b1, b2, eps, bc1, bc2);
}

} // namespace splat::simd
