#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hsu/graph.hpp"
#include "hsu/hyperdata.hpp"

namespace hsu {

// nmf: multiplicative signature and abundance rules plus simplex projection.
// l12_nmf: multiplicative signatures, projected-gradient abundances with the
//   sqrt-sparsity penalty (no neighborhood term).
// distributed: neighborhood-coupled projected-gradient abundances, no
//   sparsity penalty.
// sparse_distributed: neighborhood term and sparsity penalty together.
enum class Method { nmf, l12_nmf, distributed, sparse_distributed };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

enum class LambdaMode { automatic, fixed, zero };

struct AlgoConfig {
    double mu = 0.01;   // gradient step size
    double eta = 0.1;   // neighborhood weight
    LambdaMode lambda_mode = LambdaMode::automatic;
    double lambda_value = 0.0;  // used when lambda_mode == fixed
    std::size_t max_iter = 400;
    double rel_tol = 1e-6;    // relative objective-change stopping threshold
    double eps_floor = 1e-4;  // clamp for the s^(-1/2) singularity and the
                              // positivity precondition of multiplicative rules
    Connectivity connectivity = Connectivity::four;
    LambdaDenom lambda_denom = LambdaDenom::sqrtN_minus_one;
    std::uint64_t seed = 0;  // initialization seed when no init is supplied
    int threads = 0;         // 0 = hardware concurrency
    bool fix_signatures = false;  // keep the initial signatures (no Eq-type updates)
};

struct UnmixResult {
    Signatures signatures;
    Abundances abundances;
    std::vector<double> objective_trace;  // one entry per completed iteration
    std::size_t iterations_run = 0;
    bool converged = false;
    double lambda_used = 0.0;
    double eta_used = 0.0;
};

// ||Y - AS||_F^2 + eta * sum_k sum_{j in N_k} rho_kj |s_k - s_j|_1
//               + lambda * sum_{k,n} sqrt(s_k(n)).
// graph may be null when eta == 0.
double objective(const Matrix& Y, const Matrix& A, const Matrix& S, const NeighborGraph* graph,
                 double eta, double lambda, int threads = 0);

// Multiplicative rule A' = A .* (Y S^T) ./ (A S S^T), with A and S clamped to
// eps_floor beforehand so every denominator is strictly positive. Requires
// Y >= 0.
Matrix nmf_signature_update(const Matrix& Y, const Matrix& A, const Matrix& S, double eps_floor,
                            int threads = 0);

// d/ds ||y - A s||^2 = -2 A^T (y - A s). work must hold bands() doubles.
void data_term_gradient(const Matrix& A, const double* y, const double* s, double* grad,
                        double* work);

// One synchronous (Jacobi) update of every abundance column:
//   s_k <- s_k + mu A^T (y_k - A s_k)
//             - mu eta sum_j rho_kj sign(s_k - s_j)
//             - mu lambda clamp(s_k, eps_floor)^(-1/2)
// followed by simplex projection. All neighbor reads come from the input S.
// graph may be null when eta == 0.
Matrix sparse_distributed_abundance_step(const Matrix& Y, const Matrix& A, const Matrix& S,
                                         const NeighborGraph* graph, double mu, double eta,
                                         double lambda, double eps_floor, int threads = 0);

// The sparsity-only variant: identical to the step above with eta forced to 0.
Matrix l12_abundance_step(const Matrix& Y, const Matrix& A, const Matrix& S, double mu,
                          double lambda, double eps_floor, int threads = 0);

// Multiplicative abundance rule S' = S .* (A^T Y) ./ (A^T A S), then simplex
// projection per column. Requires Y >= 0.
Matrix nmf_abundance_update(const Matrix& Y, const Matrix& A, const Matrix& S, int threads = 0);

struct Init {
    Signatures signatures;
    Abundances abundances;
};

// Signatures: uniform(0,1) entries, each column scaled to unit maximum.
// Abundances: every column at the simplex center.
Init random_init(std::size_t bands, std::size_t p, std::size_t pixels, std::uint64_t seed);

// Alternates the multiplicative signature update with the method's abundance
// step until max_iter or the relative objective change drops below rel_tol.
// The objective trace uses the method's own cost (eta and lambda zeroed for
// methods lacking those terms). Negative observations (possible after noise)
// are clamped to zero for the multiplicative rules only; gradient steps see
// the cube as-is.
UnmixResult run_unmixing(const Cube& cube, std::size_t p, Method method, const AlgoConfig& cfg,
                         const Init* init = nullptr);

}  // namespace hsu
