#include "hsu/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hsu {

namespace {

inline double sum_ltr(const double* v, std::size_t p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) s += v[i];
    return s;
}

}  // namespace

void fix_simplex_sum(double* v, std::size_t p) {
    if (p == 0) return;
    // Candidate coordinates in decreasing magnitude; the largest almost always
    // absorbs the residual in one pass, the rest are fallbacks for the rare
    // case where rounding at one position cannot reach an exact sum.
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    for (const std::size_t m : order) {
        for (int pass = 0; pass < 8; ++pass) {
            const double s = sum_ltr(v, p);
            if (s == 1.0) return;
            const double adjusted = v[m] + (1.0 - s);
            if (adjusted < 0.0) break;
            v[m] = adjusted;
        }
        if (sum_ltr(v, p) == 1.0) return;
    }
}

void project_simplex_inplace(double* v, std::size_t p) {
    if (p == 0) throw std::invalid_argument("project_simplex: empty vector");
    for (std::size_t i = 0; i < p; ++i)
        if (!std::isfinite(v[i])) throw std::invalid_argument("project_simplex: non-finite input");

    if (p == 1) {
        v[0] = 1.0;
        return;
    }

    // Already on the simplex: return unchanged so the operator is exactly
    // idempotent (outputs below are canonicalized to satisfy this test).
    bool nonneg = true;
    for (std::size_t i = 0; i < p && nonneg; ++i) nonneg = v[i] >= 0.0;
    if (nonneg && sum_ltr(v, p) == 1.0) return;

    std::vector<double> u(v, v + p);
    std::sort(u.begin(), u.end(), std::greater<>());

    double prefix = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < p; ++j) {
        prefix += u[j];
        const double t = (prefix - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = j + 1;
            tau = t;
        }
    }
    // rho >= 1 always: for j = 0 the test reads u_1 - (u_1 - 1) = 1 > 0.
    (void)rho;

    for (std::size_t i = 0; i < p; ++i) v[i] = std::max(v[i] - tau, 0.0);
    fix_simplex_sum(v, p);
}

std::vector<double> project_simplex(std::vector<double> v) {
    project_simplex_inplace(v.data(), v.size());
    return v;
}

}  // namespace hsu
