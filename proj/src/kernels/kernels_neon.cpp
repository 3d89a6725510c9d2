// NEON kernels for aarch64, where 128-bit SIMD is baseline. Entered only
// through the dispatch table in kernels.cpp.

#include "hsu/kernels.hpp"

#if defined(HSU_KERNELS_NEON)

#include <arm_neon.h>

#include <cmath>

namespace hsu::kernels::neon {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double nrm2sq(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v = vld1q_f64(x + i);
        acc = vfmaq_f64(acc, v, v);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double asum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sum_sqrt(const double* x, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vsqrtq_f64(vmaxq_f64(vld1q_f64(x + i), zero)));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::sqrt(x[i] > 0.0 ? x[i] : 0.0);
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void mul_ratio(double* a, const double* num, const double* den, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t r = vdivq_f64(vld1q_f64(num + i), vld1q_f64(den + i));
        vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), r));
    }
    for (; i < n; ++i) a[i] *= num[i] / den[i];
}

}  // namespace

extern const Ops table;
const Ops table = {dot, nrm2sq, asum, sum_sqrt, axpy, mul_ratio};

}  // namespace hsu::kernels::neon

#endif  // HSU_KERNELS_NEON
