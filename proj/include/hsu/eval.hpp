#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hsu/hyperdata.hpp"
#include "hsu/synth.hpp"
#include "hsu/unmix.hpp"

namespace hsu {

// Spectral / abundance angle distance: arccos of the cosine similarity,
// clamped into [-1, 1] before arccos. Identical inputs give exactly 0.
double sad(const double* a, const double* a_hat, std::size_t n);
double sad(const std::vector<double>& a, const std::vector<double>& a_hat);
double aad(const double* s, const double* s_hat, std::size_t n);
double aad(const std::vector<double>& s, const std::vector<double>& s_hat);

// Optimal assignment (Kuhn-Munkres) on the p x p SAD cost matrix. Returns the
// permutation mapping estimated column index -> ground-truth column index.
std::vector<std::size_t> match_endmembers(const Matrix& a_true, const Matrix& a_est);

enum class MeanKind { arithmetic, rms };

struct MetricReport {
    std::vector<double> sad_per_endmember;  // indexed by ground-truth endmember
    double sad_mean = 0.0;                  // over endmembers
    double aad_mean = 0.0;                  // over pixels
    std::vector<std::size_t> matching;      // estimated index -> truth index
};

MetricReport evaluate(const Matrix& a_true, const Matrix& s_true, const Matrix& a_est,
                      const Matrix& s_est, MeanKind mean_kind = MeanKind::arithmetic);

struct SweepRow {
    double snr_db = 0.0;
    Method method = Method::nmf;
    std::uint64_t seed = 0;  // run seed shared by every method in the cell
    double sad_mean = 0.0;
    double aad_mean = 0.0;
    std::size_t iterations = 0;
    double wall_seconds = 0.0;
};

// Monte Carlo SNR sweep. For each (snr, run) a scene is generated from a
// run-specific seed, noise is added, and every method unmixes the same noisy
// cube from the same initialization; rows come back in (snr, method, run)
// order and are a pure function of the master seed (wall_seconds aside).
std::vector<SweepRow> run_sweep(const SpectralLibrary& lib, const SceneSpec& scene,
                                const std::vector<double>& snrs_db,
                                const std::vector<Method>& methods, std::size_t runs,
                                const AlgoConfig& algo, std::uint64_t master_seed,
                                MeanKind mean_kind = MeanKind::arithmetic, int threads = 0);

}  // namespace hsu
