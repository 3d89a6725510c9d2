#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hsu/hyperdata.hpp"

namespace hsu {

// Synthetic scene recipe: a random pure-material map over a rows x cols grid,
// then window x window box averaging of the abundances to create mixed pixels.
struct SceneSpec {
    std::size_t rows = 64, cols = 64;
    std::size_t window = 3;  // odd; window = 1 leaves the scene pure
    std::uint64_t seed = 0;
    std::vector<std::string> endmember_names;

    std::size_t endmember_count() const { return endmember_names.size(); }
};

struct NoiseSpec {
    double snr_db = 25.0;
    std::uint64_t seed = 0;
};

void validate_scene_spec(const SceneSpec& spec);

// One-hot abundance columns; material index per pixel drawn uniformly from a
// counter-based stream, so the map is a pure function of the seed.
Abundances generate_pure_map(const SceneSpec& spec);

// Box-average of abundance columns over the window x window neighborhood,
// clipped at image borders (mean over the in-bounds subset). The mean of
// simplex points is a simplex point, so no re-projection is needed.
Abundances mix_abundances(const Abundances& pure, std::size_t rows, std::size_t cols,
                          std::size_t window);

struct Scene {
    Cube cube;              // noise-free: data = signatures * abundances exactly
    Signatures signatures;  // ground truth, bands x p
    Abundances abundances;  // ground truth, p x pixels
};

Scene render_scene(const SpectralLibrary& lib, const SceneSpec& spec);

// Adds i.i.d. zero-mean Gaussian noise with variance set so that
// 10*log10(signal_power / noise_power) equals snr_db, where signal power is
// the mean squared entry of the clean cube.
Cube add_noise(const Cube& cube, const NoiseSpec& noise);

// Pixels whose largest abundance exceeds 1 - 1e-12. Experiments wanting a
// scene without pure pixels can reject the seed when this is nonzero.
std::size_t count_pure_pixels(const Abundances& ab);

}  // namespace hsu
