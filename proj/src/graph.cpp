#include "hsu/graph.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hsu/kernels.hpp"
#include "hsu/parallel.hpp"

namespace hsu {

double theta(const double* a, const double* b, std::size_t n) {
    const auto& k = kernels::ops();
    const double na = std::sqrt(k.nrm2sq(a, n));
    const double nb = std::sqrt(k.nrm2sq(b, n));
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("theta: zero-norm spectrum");
    const double c = k.dot(a, b, n) / (na * nb);
    return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

NeighborGraph build_graph(const Cube& cube, Connectivity connectivity, int threads) {
    validate_cube(cube);
    const std::size_t N = cube.pixels(), L = cube.bands();
    const std::size_t R = cube.rows, C = cube.cols;
    const auto& k = kernels::ops();

    std::vector<double> norm(N);
    for (std::size_t i = 0; i < N; ++i) {
        norm[i] = std::sqrt(k.nrm2sq(cube.data.col(i), L));
        if (norm[i] == 0.0)
            throw std::runtime_error("build_graph: zero-norm pixel spectrum at pixel " +
                                     std::to_string(i));
    }

    NeighborGraph g;
    g.neighbors.resize(N);
    g.rho.resize(N);

    // Fixed neighbor order (N, S, W, E, then diagonals) keeps results
    // schedule-independent.
    const int d4[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
    const int d8[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
    const bool eight = connectivity == Connectivity::eight;

    for_each_chunk(N, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const std::size_t r = p / C, c = p % C;
            auto& nbr = g.neighbors[p];
            auto& rho = g.rho[p];
            auto push = [&](long rr, long cc) {
                if (rr < 0 || cc < 0 || rr >= static_cast<long>(R) || cc >= static_cast<long>(C))
                    return;
                nbr.push_back(static_cast<std::uint32_t>(rr * static_cast<long>(C) + cc));
            };
            for (const auto& d : d4) push(static_cast<long>(r) + d[0], static_cast<long>(c) + d[1]);
            if (eight)
                for (const auto& d : d8)
                    push(static_cast<long>(r) + d[0], static_cast<long>(c) + d[1]);

            rho.resize(nbr.size());
            double sum = 0.0;
            for (std::size_t j = 0; j < nbr.size(); ++j) {
                const std::size_t q = nbr[j];
                double t = k.dot(cube.data.col(p), cube.data.col(q), L) / (norm[p] * norm[q]);
                if (t < 0.0) t = 0.0;  // keep rho a convex combination under noisy negatives
                rho[j] = t;
                sum += t;
            }
            if (nbr.empty()) continue;
            if (sum > 0.0) {
                for (double& w : rho) w /= sum;
            } else {
                // all similarities clamped away: fall back to uniform weights
                const double w = 1.0 / static_cast<double>(nbr.size());
                for (double& x : rho) x = w;
            }
        }
    });
    return g;
}

double auto_lambda(const Cube& cube, LambdaDenom denom) {
    validate_cube(cube);
    const std::size_t N = cube.pixels(), L = cube.bands();
    if (N < 2) throw std::invalid_argument("auto_lambda: needs at least two pixels");

    const double sqrtN = std::sqrt(static_cast<double>(N));
    const double d = denom == LambdaDenom::sqrtN_minus_one
                         ? sqrtN - 1.0
                         : std::sqrt(static_cast<double>(N) - 1.0);

    double sum = 0.0;
    for (std::size_t t = 0; t < L; ++t) {
        double l1 = 0.0, l2sq = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            const double v = cube.data(t, p);
            l1 += std::fabs(v);
            l2sq += v * v;
        }
        if (l2sq == 0.0)
            throw std::runtime_error("auto_lambda: zero-norm band " + std::to_string(t));
        double term = (sqrtN - l1 / std::sqrt(l2sq)) / d;
        if (term < 0.0) term = 0.0;  // rounding can push constant bands epsilon-negative
        sum += term;
    }
    return sum / std::sqrt(static_cast<double>(L));
}

}  // namespace hsu
