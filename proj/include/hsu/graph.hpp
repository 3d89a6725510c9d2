#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hsu/hyperdata.hpp"

namespace hsu {

enum class Connectivity { four = 4, eight = 8 };

// Per-pixel spatial adjacency with normalized spectral-similarity weights.
// For every non-isolated pixel k, rho[k] sums to 1 and pairs elementwise with
// neighbors[k]. The neighbor relation is symmetric as a set relation, though
// rho_kl != rho_lk in general.
struct NeighborGraph {
    std::vector<std::vector<std::uint32_t>> neighbors;
    std::vector<std::vector<double>> rho;

    std::size_t pixels() const { return neighbors.size(); }
};

// Cosine similarity of two spectra, clamped into [-1, 1]. Errors on a
// zero-norm input.
double theta(const double* a, const double* b, std::size_t n);

// Grid adjacency (4- or 8-connected; border pixels have fewer neighbors) with
// rho_kj = max(theta_kj, 0) normalized over each pixel's neighbor set. A 1x1
// image yields one node with an empty neighbor list.
NeighborGraph build_graph(const Cube& cube, Connectivity connectivity, int threads = 0);

// Denominator convention for the per-band sparseness score
// (sqrt(N) - |y|_1/|y|_2) / denom: the default (sqrt(N) - 1) bounds every band
// term to [0, 1]; sqrt(N - 1) is provided as an alternative.
enum class LambdaDenom { sqrtN_minus_one, sqrt_of_N_minus_one };

// Data-driven sparsity weight: the mean per-band sparseness scaled by sqrt(L).
// Requires at least two pixels and no zero-norm band.
double auto_lambda(const Cube& cube, LambdaDenom denom = LambdaDenom::sqrtN_minus_one);

}  // namespace hsu
