#include "hsu/hyperdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hsu {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& raw, const std::string& where) {
    const std::string tok = trim(raw);
    if (tok.empty()) fail(where + ": empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail(where + ": cannot parse '" + tok + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& raw, const std::string& where) {
    const std::string tok = trim(raw);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        fail(where + ": expected a nonnegative integer, got '" + tok + "'");
    return std::stoull(tok);
}

}  // namespace

const Material* SpectralLibrary::find(std::string_view name) const {
    for (const auto& m : materials)
        if (m.name == name) return &m;
    return nullptr;
}

void validate_cube(const Cube& cube) {
    if (cube.bands() == 0 || cube.pixels() == 0) fail("cube: empty data");
    if (cube.rows * cube.cols != cube.pixels())
        fail("cube: rows*cols (" + std::to_string(cube.rows * cube.cols) +
             ") does not match pixel count (" + std::to_string(cube.pixels()) + ")");
    if (!cube.band_wavelengths.empty() && cube.band_wavelengths.size() != cube.bands())
        fail("cube: wavelength list length does not match band count");
}

void validate_signatures(const Signatures& sig) {
    for (std::size_t j = 0; j < sig.count(); ++j) {
        const double* col = sig.a.col(j);
        double maxv = 0.0;
        for (std::size_t i = 0; i < sig.bands(); ++i) {
            if (col[i] < 0.0) fail("signatures: negative entry in column " + std::to_string(j));
            maxv = std::max(maxv, col[i]);
        }
        if (maxv == 0.0) fail("signatures: all-zero column " + std::to_string(j));
    }
}

void validate_abundances(const Abundances& ab, double sum_tol) {
    for (std::size_t k = 0; k < ab.pixels(); ++k) {
        const double* col = ab.s.col(k);
        double sum = 0.0;
        for (std::size_t n = 0; n < ab.count(); ++n) {
            if (col[n] < 0.0) fail("abundances: negative entry in pixel " + std::to_string(k));
            sum += col[n];
        }
        if (std::fabs(sum - 1.0) > sum_tol)
            fail("abundances: pixel " + std::to_string(k) + " sums to " + std::to_string(sum));
    }
}

SpectralLibrary load_spectral_library(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open spectral library '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file");
    const auto header = split(line, ',');
    if (header.empty() || trim(header[0]) != "wavelength")
        fail(path + ": header must start with 'wavelength'");
    if (header.size() < 2) fail(path + ": no materials");

    SpectralLibrary lib;
    std::set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (name.empty()) fail(path + ": empty material name in column " + std::to_string(c + 1));
        if (!seen.insert(name).second) fail(path + ": duplicate material name '" + name + "'");
        lib.materials.push_back({name, {}});
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split(line, ',');
        if (fields.size() != header.size())
            fail(path + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                 " fields, expected " + std::to_string(header.size()));
        const std::string where = path + ": row " + std::to_string(row);
        const double wl = parse_double(fields[0], where + ", column 1");
        if (!lib.wavelengths.empty() && wl <= lib.wavelengths.back())
            fail(path + ": non-increasing wavelengths at row " + std::to_string(row));
        lib.wavelengths.push_back(wl);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const double v = parse_double(fields[c], where + ", column " + std::to_string(c + 1));
            if (v < 0.0)
                fail(path + ": negative reflectance at row " + std::to_string(row) + ", column " +
                     std::to_string(c + 1) + " (material '" + lib.materials[c - 1].name + "')");
            lib.materials[c - 1].reflectance.push_back(v);
        }
    }
    if (lib.wavelengths.empty()) fail(path + ": no bands");
    return lib;
}

void save_spectral_csv(const std::string& path, const std::vector<double>& wavelengths,
                       const std::vector<std::string>& names, const Matrix& columns) {
    if (columns.rows() != wavelengths.size()) fail("save_spectral_csv: band count mismatch");
    if (columns.cols() != names.size()) fail("save_spectral_csv: name count mismatch");
    std::ofstream out(path);
    if (!out) fail("cannot write '" + path + "'");
    out << "wavelength";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < wavelengths.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", wavelengths[i]);
        out << buf;
        for (std::size_t j = 0; j < names.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", columns(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) fail("I/O error while writing '" + path + "'");
}

namespace {

std::string payload_path(const std::string& header_path) {
    constexpr std::string_view suffix = ".hdr";
    if (header_path.size() <= suffix.size() ||
        header_path.compare(header_path.size() - suffix.size(), suffix.size(), suffix) != 0)
        fail("cube header path must end in '.hdr': '" + header_path + "'");
    return header_path.substr(0, header_path.size() - suffix.size());
}

struct CubeHeader {
    std::size_t samples = 0, lines = 0, bands = 0;
    std::string interleave, data_type, byte_order;
    std::vector<double> wavelengths;
};

CubeHeader parse_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open cube header '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto pos = t.find('=');
        if (pos == std::string::npos) pos = t.find(':');
        if (pos == std::string::npos) fail(path + ": malformed header line '" + t + "'");
        kv[trim(t.substr(0, pos))] = trim(t.substr(pos + 1));
    }
    auto require = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) fail(path + ": missing header key '" + std::string(key) + "'");
        return it->second;
    };
    CubeHeader h;
    h.samples = parse_uint(require("samples"), path);
    h.lines = parse_uint(require("lines"), path);
    h.bands = parse_uint(require("bands"), path);
    h.interleave = require("interleave");
    h.data_type = require("data_type");
    h.byte_order = require("byte_order");
    if (h.samples == 0 || h.lines == 0 || h.bands == 0) fail(path + ": zero-sized dimension");
    if (h.interleave != "bsq" && h.interleave != "bil" && h.interleave != "bip")
        fail(path + ": unknown interleave '" + h.interleave + "'");
    if (h.data_type != "float32" && h.data_type != "int16")
        fail(path + ": unknown data type '" + h.data_type + "'");
    if (h.byte_order != "little" && h.byte_order != "big")
        fail(path + ": unknown byte order '" + h.byte_order + "'");
    if (const auto it = kv.find("wavelengths"); it != kv.end()) {
        for (const auto& tok : split(it->second, ','))
            h.wavelengths.push_back(parse_double(tok, path + ": wavelengths"));
        if (h.wavelengths.size() != h.bands)
            fail(path + ": wavelengths list length does not match band count");
    }
    return h;
}

inline float f32_from_le(const unsigned char* b) {
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                            (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

inline float f32_from_be(const unsigned char* b) {
    const unsigned char r[4] = {b[3], b[2], b[1], b[0]};
    return f32_from_le(r);
}

inline std::int16_t i16_from(const unsigned char* b, bool big) {
    const std::uint16_t u = big ? static_cast<std::uint16_t>((b[0] << 8) | b[1])
                                : static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    std::int16_t v;
    std::memcpy(&v, &u, 2);
    return v;
}

}  // namespace

Cube read_cube(const std::string& header_path) {
    const CubeHeader h = parse_header(header_path);
    const std::string data_path = payload_path(header_path);

    std::ifstream in(data_path, std::ios::binary);
    if (!in) fail("cannot open cube payload '" + data_path + "'");
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    const std::size_t elem = h.data_type == "float32" ? 4 : 2;
    const std::size_t count = h.samples * h.lines * h.bands;
    if (raw.size() != count * elem)
        fail(data_path + ": payload size mismatch, expected " + std::to_string(count * elem) +
             " bytes, got " + std::to_string(raw.size()));

    const bool big = h.byte_order == "big";
    auto element = [&](std::size_t idx) -> double {
        const unsigned char* b = raw.data() + idx * elem;
        if (elem == 4) return big ? f32_from_be(b) : f32_from_le(b);
        return static_cast<double>(i16_from(b, big));
    };

    Cube cube;
    cube.rows = h.lines;
    cube.cols = h.samples;
    cube.data = Matrix(h.bands, h.samples * h.lines);
    cube.band_wavelengths = h.wavelengths;

    const std::size_t S = h.samples, B = h.bands, N = S * h.lines;
    for (std::size_t t = 0; t < B; ++t) {
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t line = k / S, sample = k % S;
            std::size_t idx;
            if (h.interleave == "bsq")
                idx = t * N + k;
            else if (h.interleave == "bil")
                idx = line * (B * S) + t * S + sample;
            else  // bip
                idx = k * B + t;
            cube.data(t, k) = element(idx);
        }
    }
    return cube;
}

void write_cube(const Cube& cube, const std::string& header_path) {
    validate_cube(cube);
    const std::string data_path = payload_path(header_path);

    {
        std::ofstream out(data_path, std::ios::binary);
        if (!out) fail("cannot write cube payload '" + data_path + "'");
        std::vector<unsigned char> buf;
        buf.reserve(cube.data.size() * 4);
        // bsq: band-major, row-major pixels within a band
        for (std::size_t t = 0; t < cube.bands(); ++t) {
            for (std::size_t k = 0; k < cube.pixels(); ++k) {
                const float f = static_cast<float>(cube.data(t, k));
                std::uint32_t u;
                std::memcpy(&u, &f, 4);
                buf.push_back(static_cast<unsigned char>(u & 0xff));
                buf.push_back(static_cast<unsigned char>((u >> 8) & 0xff));
                buf.push_back(static_cast<unsigned char>((u >> 16) & 0xff));
                buf.push_back(static_cast<unsigned char>((u >> 24) & 0xff));
            }
        }
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
        if (!out) fail("I/O error while writing '" + data_path + "'");
    }

    std::ofstream out(header_path);
    if (!out) fail("cannot write cube header '" + header_path + "'");
    out << "samples = " << cube.cols << '\n';
    out << "lines = " << cube.rows << '\n';
    out << "bands = " << cube.bands() << '\n';
    out << "interleave = bsq\n";
    out << "data_type = float32\n";
    out << "byte_order = little\n";
    if (!cube.band_wavelengths.empty()) {
        char buf[64];
        out << "wavelengths = ";
        for (std::size_t i = 0; i < cube.band_wavelengths.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", cube.band_wavelengths[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) fail("I/O error while writing '" + header_path + "'");
}

Cube drop_bands(const Cube& cube, const std::vector<std::size_t>& bands) {
    validate_cube(cube);
    std::set<std::size_t> drop;
    for (const std::size_t b : bands) {
        if (b >= cube.bands())
            fail("drop_bands: index " + std::to_string(b) + " out of range [0, " +
                 std::to_string(cube.bands()) + ")");
        drop.insert(b);
    }
    const std::size_t kept = cube.bands() - drop.size();
    if (kept == 0) fail("drop_bands: empty cube (all bands removed)");

    Cube out;
    out.rows = cube.rows;
    out.cols = cube.cols;
    out.data = Matrix(kept, cube.pixels());
    if (!cube.band_wavelengths.empty()) out.band_wavelengths.reserve(kept);

    std::size_t dst = 0;
    for (std::size_t t = 0; t < cube.bands(); ++t) {
        if (drop.count(t)) continue;
        for (std::size_t k = 0; k < cube.pixels(); ++k) out.data(dst, k) = cube.data(t, k);
        if (!cube.band_wavelengths.empty())
            out.band_wavelengths.push_back(cube.band_wavelengths[t]);
        ++dst;
    }
    return out;
}

}  // namespace hsu
