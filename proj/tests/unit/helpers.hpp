#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hsu/hyperdata.hpp"
#include "hsu/matrix.hpp"

namespace testutil {

// Deterministic synthetic spectral library over [0.38, 2.5] micrometers:
// a shared smooth continuum blended with material-specific absorption bumps,
// giving moderately correlated signatures like real mineral libraries.
inline hsu::SpectralLibrary make_library(std::size_t bands, std::size_t materials) {
    hsu::SpectralLibrary lib;
    lib.wavelengths.resize(bands);
    for (std::size_t i = 0; i < bands; ++i)
        lib.wavelengths[i] =
            0.38 + (2.5 - 0.38) * static_cast<double>(i) / static_cast<double>(bands - 1);

    constexpr double blend = 0.65;  // bump weight vs shared continuum
    for (std::size_t m = 0; m < materials; ++m) {
        hsu::Material mat;
        mat.name = "mat" + std::to_string(m);
        mat.reflectance.resize(bands);
        const double c1 = 0.45 + 0.32 * static_cast<double>(m % 7);
        const double c2 = 2.35 - 0.29 * static_cast<double>((m * 3 + 1) % 7);
        const double w1 = 0.08 + 0.015 * static_cast<double>(m % 5);
        const double w2 = 0.16 + 0.02 * static_cast<double>(m % 3);
        for (std::size_t i = 0; i < bands; ++i) {
            const double x = lib.wavelengths[i];
            double cont = 0.55 + 0.18 * std::tanh((x - 0.9) / 0.45) -
                          0.05 * std::pow((x - 1.6) / 1.1, 2.0);
            cont *= 1.0 + 0.05 * std::sin(0.9 * static_cast<double>(m) + 1.1 * x);
            const double g1 = std::exp(-0.5 * std::pow((x - c1) / w1, 2.0));
            const double g2 = std::exp(-0.5 * std::pow((x - c2) / w2, 2.0));
            const double bump = 0.05 + 0.55 * g1 + 0.35 * g2;
            const double r = (1.0 - blend) * cont + blend * bump;
            mat.reflectance[i] = r < 0.02 ? 0.02 : r;
        }
        lib.materials.push_back(std::move(mat));
    }
    return lib;
}

inline void write_library_csv(const hsu::SpectralLibrary& lib, const std::string& path) {
    hsu::Matrix cols(lib.bands(), lib.materials.size());
    std::vector<std::string> names;
    for (std::size_t j = 0; j < lib.materials.size(); ++j) {
        names.push_back(lib.materials[j].name);
        for (std::size_t i = 0; i < lib.bands(); ++i)
            cols(i, j) = lib.materials[j].reflectance[i];
    }
    hsu::save_spectral_csv(path, lib.wavelengths, names, cols);
}

inline std::vector<std::string> first_names(const hsu::SpectralLibrary& lib, std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < p; ++i) names.push_back(lib.materials[i].name);
    return names;
}

inline bool bitwise_equal(const hsu::Matrix& a, const hsu::Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 ||
            std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

inline bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path = base / ("hsunmix_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace testutil
