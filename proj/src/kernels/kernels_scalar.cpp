#include <cmath>

#include "hsu/kernels.hpp"

// Reference kernels. Plain loops, no manual unrolling; these define the
// semantics the SIMD variants are tested against.

namespace hsu::kernels::scalar {

namespace {

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double nrm2sq(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double asum(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

double sum_sqrt(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::sqrt(x[i] > 0.0 ? x[i] : 0.0);
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void mul_ratio(double* a, const double* num, const double* den, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= num[i] / den[i];
}

}  // namespace

extern const Ops table;
const Ops table = {dot, nrm2sq, asum, sum_sqrt, axpy, mul_ratio};

}  // namespace hsu::kernels::scalar
