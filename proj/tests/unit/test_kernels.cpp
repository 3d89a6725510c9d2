#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsu/kernels.hpp"
#include "hsu/rng.hpp"

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double lo = -1.0,
                               double hi = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * hsu::rng::uniform01(seed, 0x7e57, i);
    return v;
}

struct BackendGuard {
    hsu::kernels::Backend saved = hsu::kernels::active();
    ~BackendGuard() { hsu::kernels::set_active(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
    BackendGuard guard;
    REQUIRE(hsu::kernels::set_active(hsu::kernels::Backend::scalar));
    const auto& k = hsu::kernels::ops();

    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                          std::size_t{7}, std::size_t{8}, std::size_t{31}, std::size_t{257}}) {
        auto x = random_vec(n, 11 + n);
        auto y = random_vec(n, 23 + n);

        double dot = 0.0, n2 = 0.0, a1 = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += x[i] * y[i];
            n2 += x[i] * x[i];
            a1 += std::fabs(x[i]);
            ss += std::sqrt(x[i] > 0 ? x[i] : 0.0);
        }
        CHECK(k.dot(x.data(), y.data(), n) == doctest::Approx(dot).epsilon(1e-14));
        CHECK(k.nrm2sq(x.data(), n) == doctest::Approx(n2).epsilon(1e-14));
        CHECK(k.asum(x.data(), n) == doctest::Approx(a1).epsilon(1e-14));
        CHECK(k.sum_sqrt(x.data(), n) == doctest::Approx(ss).epsilon(1e-14));

        auto y2 = y;
        k.axpy(0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y[i] + 0.37 * x[i]));

        auto a = random_vec(n, 5, 0.1, 1.0);
        auto num = random_vec(n, 6, 0.1, 1.0);
        auto den = random_vec(n, 7, 0.5, 2.0);
        auto a2 = a;
        k.mul_ratio(a2.data(), num.data(), den.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(a2[i] == doctest::Approx(a[i] * num[i] / den[i]));
    }
}

TEST_CASE("simd backends agree with scalar reference") {
    BackendGuard guard;
    const auto scalar = hsu::kernels::Backend::scalar;

    for (auto backend : {hsu::kernels::Backend::avx2, hsu::kernels::Backend::neon}) {
        if (!hsu::kernels::available(backend)) continue;
        INFO("backend: ", hsu::kernels::name(backend));

        for (std::size_t n :
             {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{16}, std::size_t{33},
              std::size_t{64}, std::size_t{211}, std::size_t{1024}}) {
            auto x = random_vec(n, 101 + n);
            auto y = random_vec(n, 207 + n);
            auto pos = random_vec(n, 319 + n, 0.0, 2.0);
            auto den = random_vec(n, 431 + n, 0.5, 2.0);

            REQUIRE(hsu::kernels::set_active(scalar));
            const auto& ks = hsu::kernels::ops();
            const double dot_s = ks.dot(x.data(), y.data(), n);
            const double n2_s = ks.nrm2sq(x.data(), n);
            const double a1_s = ks.asum(x.data(), n);
            const double ss_s = ks.sum_sqrt(pos.data(), n);
            auto axpy_s = y;
            ks.axpy(-1.7, x.data(), axpy_s.data(), n);
            auto ratio_s = pos;
            ks.mul_ratio(ratio_s.data(), y.data(), den.data(), n);

            REQUIRE(hsu::kernels::set_active(backend));
            const auto& kv = hsu::kernels::ops();
            const double tol = 1e-13 * static_cast<double>(n + 1);
            CHECK(kv.dot(x.data(), y.data(), n) == doctest::Approx(dot_s).epsilon(tol));
            CHECK(kv.nrm2sq(x.data(), n) == doctest::Approx(n2_s).epsilon(tol));
            CHECK(kv.asum(x.data(), n) == doctest::Approx(a1_s).epsilon(tol));
            CHECK(kv.sum_sqrt(pos.data(), n) == doctest::Approx(ss_s).epsilon(tol));

            auto axpy_v = y;
            kv.axpy(-1.7, x.data(), axpy_v.data(), n);
            auto ratio_v = pos;
            kv.mul_ratio(ratio_v.data(), y.data(), den.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(axpy_v[i] == doctest::Approx(axpy_s[i]).epsilon(1e-14));
                CHECK(ratio_v[i] == doctest::Approx(ratio_s[i]).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("backend selection") {
    BackendGuard guard;
    CHECK(hsu::kernels::available(hsu::kernels::Backend::scalar));
    const auto best = hsu::kernels::detect_best();
    CHECK(hsu::kernels::available(best));
    CHECK(hsu::kernels::set_active(hsu::kernels::Backend::scalar));
    CHECK(hsu::kernels::active() == hsu::kernels::Backend::scalar);
}
