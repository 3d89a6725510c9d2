#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hsu/matrix.hpp"

namespace hsu {

struct Material {
    std::string name;
    std::vector<double> reflectance;  // unitless, in [0, 1], one entry per band
};

// Named reflectance signatures over a common wavelength grid.
struct SpectralLibrary {
    std::vector<double> wavelengths;  // micrometers, strictly increasing
    std::vector<Material> materials;

    std::size_t bands() const { return wavelengths.size(); }
    const Material* find(std::string_view name) const;
};

// Observed hyperspectral image. The data matrix is bands x pixels; column k
// holds the spectrum of pixel k. Pixel (r, c) maps to column r * cols + c
// (row-major), a convention relied on throughout.
struct Cube {
    Matrix data;
    std::size_t rows = 0, cols = 0;
    std::vector<double> band_wavelengths;  // micrometers; empty or length bands()

    std::size_t bands() const { return data.rows(); }
    std::size_t pixels() const { return data.cols(); }
    std::size_t pixel_index(std::size_t r, std::size_t c) const { return r * cols + c; }
};

// Endmember signature matrix, bands x endmembers, entries >= 0.
struct Signatures {
    Matrix a;
    std::size_t bands() const { return a.rows(); }
    std::size_t count() const { return a.cols(); }
};

// Fractional abundances, endmembers x pixels; every column lies on the unit
// simplex (nonnegative, sums to one).
struct Abundances {
    Matrix s;
    std::size_t count() const { return s.rows(); }
    std::size_t pixels() const { return s.cols(); }
};

void validate_cube(const Cube& cube);
void validate_signatures(const Signatures& sig);
void validate_abundances(const Abundances& ab, double sum_tol = 1e-9);

// CSV with header `wavelength,<name1>,<name2>,...` and one numeric row per
// band. Errors identify the offending row/column.
SpectralLibrary load_spectral_library(const std::string& path);

// Writes the same CSV layout; used for libraries and for signature matrices.
void save_spectral_csv(const std::string& path, const std::vector<double>& wavelengths,
                       const std::vector<std::string>& names, const Matrix& columns);

// Cube container format: a raw binary payload next to a text header
// (`key = value` lines). The header path must end in ".hdr"; the payload is
// the same path without that suffix. Keys: samples, lines, bands,
// interleave {bsq,bil,bip}, data_type {float32,int16}, byte_order
// {little,big}, and optional comma-separated wavelengths.
Cube read_cube(const std::string& header_path);

// Canonical writer: float32, little-endian, bsq. read_cube(write_cube(c))
// reproduces c bit-exactly whenever c's samples are float32-representable
// (always true for cubes that came from disk).
void write_cube(const Cube& cube, const std::string& header_path);

// Removes the listed band indices (0-based), preserving the order of the
// remaining bands and filtering wavelengths identically.
Cube drop_bands(const Cube& cube, const std::vector<std::size_t>& bands);

}  // namespace hsu
