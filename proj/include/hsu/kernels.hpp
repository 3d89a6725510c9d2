#pragma once

#include <cstddef>

namespace hsu::kernels {

// Data-parallel inner loops used by the unmixing updates. A scalar reference
// implementation always exists; AVX2 (x86-64) and NEON (aarch64) variants are
// selected at runtime and must agree with the reference up to floating-point
// reassociation (see tests/unit/test_kernels.cpp).
enum class Backend { scalar = 0, avx2 = 1, neon = 2 };

struct Ops {
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*nrm2sq)(const double* x, std::size_t n);
    double (*asum)(const double* x, std::size_t n);
    // Sum of sqrt(max(x_i, 0)).
    double (*sum_sqrt)(const double* x, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // a_i *= num_i / den_i  (caller guarantees den_i != 0)
    void (*mul_ratio)(double* a, const double* num, const double* den, std::size_t n);
};

const Ops& ops();
Backend active();
const char* name(Backend b);
bool available(Backend b);
// Switches the active backend; returns false (and leaves the selection
// unchanged) if the requested backend is not available on this host.
bool set_active(Backend b);
Backend detect_best();

}  // namespace hsu::kernels
