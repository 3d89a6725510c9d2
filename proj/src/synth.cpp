#include "hsu/synth.hpp"

#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>
#include <string>

#include "hsu/kernels.hpp"
#include "hsu/rng.hpp"

namespace hsu {

namespace {

constexpr std::uint64_t kStreamPureMap = 0xA1;
constexpr std::uint64_t kStreamNoise = 0xA2;

}  // namespace

void validate_scene_spec(const SceneSpec& spec) {
    if (spec.endmember_count() < 2)
        throw std::invalid_argument("scene: need at least 2 endmembers");
    std::set<std::string> seen;
    for (const auto& n : spec.endmember_names) {
        if (n.empty()) throw std::invalid_argument("scene: empty endmember name");
        if (!seen.insert(n).second)
            throw std::invalid_argument("scene: duplicate endmember name '" + n + "'");
    }
    if (spec.window == 0 || spec.window % 2 == 0)
        throw std::invalid_argument("scene: window must be odd, got " +
                                    std::to_string(spec.window));
    if (spec.rows < spec.window || spec.cols < spec.window)
        throw std::invalid_argument("scene: image must be at least window x window");
}

Abundances generate_pure_map(const SceneSpec& spec) {
    validate_scene_spec(spec);
    const std::size_t p = spec.endmember_count();
    const std::size_t N = spec.rows * spec.cols;
    Abundances ab{Matrix(p, N)};
    for (std::size_t k = 0; k < N; ++k) {
        const auto i = rng::uniform_index(spec.seed, kStreamPureMap, k,
                                          static_cast<std::uint32_t>(p));
        ab.s(i, k) = 1.0;
    }
    return ab;
}

Abundances mix_abundances(const Abundances& pure, std::size_t rows, std::size_t cols,
                          std::size_t window) {
    if (rows * cols != pure.pixels())
        throw std::invalid_argument("mix_abundances: rows*cols does not match pixel count");
    if (window == 0 || window % 2 == 0)
        throw std::invalid_argument("mix_abundances: window must be odd, got " +
                                    std::to_string(window));
    if (window > rows && window > cols)
        throw std::invalid_argument("mix_abundances: window larger than both image dimensions");

    const std::size_t p = pure.count();
    const long h = static_cast<long>(window / 2);
    Abundances out{Matrix(p, pure.pixels())};

    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double* dst = out.s.col(r * cols + c);
            std::size_t count = 0;
            for (long dr = -h; dr <= h; ++dr) {
                const long rr = static_cast<long>(r) + dr;
                if (rr < 0 || rr >= static_cast<long>(rows)) continue;
                for (long dc = -h; dc <= h; ++dc) {
                    const long cc = static_cast<long>(c) + dc;
                    if (cc < 0 || cc >= static_cast<long>(cols)) continue;
                    const double* src = pure.s.col(static_cast<std::size_t>(rr) * cols +
                                                   static_cast<std::size_t>(cc));
                    for (std::size_t n = 0; n < p; ++n) dst[n] += src[n];
                    ++count;
                }
            }
            const double inv = 1.0 / static_cast<double>(count);
            for (std::size_t n = 0; n < p; ++n) dst[n] *= inv;
        }
    }
    return out;
}

Scene render_scene(const SpectralLibrary& lib, const SceneSpec& spec) {
    validate_scene_spec(spec);
    const std::size_t L = lib.bands();
    const std::size_t p = spec.endmember_count();

    Signatures sig{Matrix(L, p)};
    for (std::size_t j = 0; j < p; ++j) {
        const Material* m = lib.find(spec.endmember_names[j]);
        if (!m)
            throw std::invalid_argument("render_scene: unknown material '" +
                                        spec.endmember_names[j] + "' in spectral library");
        std::memcpy(sig.a.col(j), m->reflectance.data(), L * sizeof(double));
    }

    Abundances ab = mix_abundances(generate_pure_map(spec), spec.rows, spec.cols, spec.window);

    Cube cube;
    cube.rows = spec.rows;
    cube.cols = spec.cols;
    cube.band_wavelengths = lib.wavelengths;
    cube.data = Matrix(L, ab.pixels());
    const auto& k = kernels::ops();
    for (std::size_t px = 0; px < ab.pixels(); ++px) {
        double* y = cube.data.col(px);
        const double* s = ab.s.col(px);
        for (std::size_t n = 0; n < p; ++n)
            if (s[n] != 0.0) k.axpy(s[n], sig.a.col(n), y, L);
    }
    return {std::move(cube), std::move(sig), std::move(ab)};
}

Cube add_noise(const Cube& cube, const NoiseSpec& noise) {
    validate_cube(cube);
    const std::size_t total = cube.data.size();
    const double power = kernels::ops().nrm2sq(cube.data.data(), total) /
                         static_cast<double>(total);
    if (power == 0.0) throw std::runtime_error("add_noise: zero signal power");

    const double sigma = std::sqrt(power / std::pow(10.0, noise.snr_db / 10.0));
    Cube out = cube;
    double* d = out.data.data();
    for (std::size_t i = 0; i < total; ++i)
        d[i] += sigma * rng::gaussian(noise.seed, kStreamNoise, i);
    return out;
}

std::size_t count_pure_pixels(const Abundances& ab) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < ab.pixels(); ++k) {
        const double* col = ab.s.col(k);
        for (std::size_t n = 0; n < ab.count(); ++n) {
            if (col[n] > 1.0 - 1e-12) {
                ++count;
                break;
            }
        }
    }
    return count;
}

}  // namespace hsu
