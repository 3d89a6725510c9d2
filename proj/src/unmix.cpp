#include "hsu/unmix.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "hsu/kernels.hpp"
#include "hsu/parallel.hpp"
#include "hsu/rng.hpp"
#include "hsu/simplex.hpp"

namespace hsu {

namespace {

constexpr std::uint64_t kStreamInitSignatures = 0xB1;

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

inline double sign(double x) {
    return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

void check_dims(const Matrix& Y, const Matrix& A, const Matrix& S) {
    if (A.rows() != Y.rows() || S.cols() != Y.cols() || A.cols() != S.rows())
        fail("unmix: dimension mismatch, Y is " + std::to_string(Y.rows()) + "x" +
             std::to_string(Y.cols()) + ", A is " + std::to_string(A.rows()) + "x" +
             std::to_string(A.cols()) + ", S is " + std::to_string(S.rows()) + "x" +
             std::to_string(S.cols()));
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::nmf:
            return "nmf";
        case Method::l12_nmf:
            return "l12_nmf";
        case Method::distributed:
            return "distributed";
        case Method::sparse_distributed:
            return "sparse_distributed";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::nmf, Method::l12_nmf, Method::distributed,
                     Method::sparse_distributed})
        if (name == to_string(m)) return m;
    fail("unknown method '" + name +
         "' (valid: nmf, l12_nmf, distributed, sparse_distributed)");
}

double objective(const Matrix& Y, const Matrix& A, const Matrix& S, const NeighborGraph* graph,
                 double eta, double lambda, int threads) {
    check_dims(Y, A, S);
    if (eta != 0.0 && (!graph || graph->pixels() != Y.cols()))
        fail("objective: neighborhood term requires a graph over the same pixels");

    const std::size_t L = Y.rows(), N = Y.cols(), p = A.cols();
    const auto& k = kernels::ops();

    double value = reduce_chunks(N, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> r(L);
        double acc = 0.0;
        for (std::size_t px = begin; px < end; ++px) {
            std::memcpy(r.data(), Y.col(px), L * sizeof(double));
            const double* s = S.col(px);
            for (std::size_t n = 0; n < p; ++n)
                if (s[n] != 0.0) k.axpy(-s[n], A.col(n), r.data(), L);
            acc += k.nrm2sq(r.data(), L);
        }
        return acc;
    });

    if (eta != 0.0) {
        value += eta * reduce_chunks(N, threads, [&](std::size_t begin, std::size_t end) {
            double acc = 0.0;
            for (std::size_t px = begin; px < end; ++px) {
                const double* s = S.col(px);
                const auto& nbr = graph->neighbors[px];
                const auto& rho = graph->rho[px];
                for (std::size_t j = 0; j < nbr.size(); ++j) {
                    const double* sj = S.col(nbr[j]);
                    double l1 = 0.0;
                    for (std::size_t n = 0; n < p; ++n) l1 += std::fabs(s[n] - sj[n]);
                    acc += rho[j] * l1;
                }
            }
            return acc;
        });
    }

    if (lambda != 0.0) value += lambda * k.sum_sqrt(S.data(), S.size());
    return value;
}

Matrix nmf_signature_update(const Matrix& Y, const Matrix& A, const Matrix& S, double eps_floor,
                            int threads) {
    check_dims(Y, A, S);
    if (eps_floor <= 0.0) fail("nmf_signature_update: eps_floor must be positive");
    const std::size_t L = Y.rows(), N = Y.cols(), p = A.cols();
    const auto& k = kernels::ops();

    // num = Y Sc^T and sst = Sc Sc^T accumulated per chunk, combined in chunk
    // order (Sc clamps S at eps_floor on the fly).
    const std::size_t chunks = chunk_count(N);
    std::vector<Matrix> num_part(chunks), sst_part(chunks);
    for_each_chunk(N, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        Matrix num(L, p), sst(p, p);
        std::vector<double> sc(p);
        for (std::size_t px = begin; px < end; ++px) {
            const double* s = S.col(px);
            for (std::size_t n = 0; n < p; ++n) sc[n] = std::max(s[n], eps_floor);
            for (std::size_t n = 0; n < p; ++n) {
                k.axpy(sc[n], Y.col(px), num.col(n), L);
                for (std::size_t m = 0; m < p; ++m) sst(m, n) += sc[m] * sc[n];
            }
        }
        num_part[c] = std::move(num);
        sst_part[c] = std::move(sst);
    });
    Matrix num(L, p), sst(p, p);
    for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t i = 0; i < num.size(); ++i) num.data()[i] += num_part[c].data()[i];
        for (std::size_t i = 0; i < sst.size(); ++i) sst.data()[i] += sst_part[c].data()[i];
    }

    Matrix Ac(L, p);
    for (std::size_t i = 0; i < Ac.size(); ++i) Ac.data()[i] = std::max(A.data()[i], eps_floor);

    Matrix den(L, p);
    for (std::size_t n = 0; n < p; ++n)
        for (std::size_t m = 0; m < p; ++m) k.axpy(sst(m, n), Ac.col(m), den.col(n), L);

    for (std::size_t i = 0; i < den.size(); ++i)
        if (den.data()[i] <= 0.0)
            fail("nmf_signature_update: zero denominator after clamping");

    k.mul_ratio(Ac.data(), num.data(), den.data(), L * p);
    return Ac;
}

void data_term_gradient(const Matrix& A, const double* y, const double* s, double* grad,
                        double* work) {
    const std::size_t L = A.rows(), p = A.cols();
    const auto& k = kernels::ops();
    std::memcpy(work, y, L * sizeof(double));
    for (std::size_t n = 0; n < p; ++n)
        if (s[n] != 0.0) k.axpy(-s[n], A.col(n), work, L);
    for (std::size_t n = 0; n < p; ++n) grad[n] = -2.0 * k.dot(A.col(n), work, L);
}

Matrix sparse_distributed_abundance_step(const Matrix& Y, const Matrix& A, const Matrix& S,
                                         const NeighborGraph* graph, double mu, double eta,
                                         double lambda, double eps_floor, int threads) {
    check_dims(Y, A, S);
    if (mu <= 0.0) fail("abundance step: mu must be positive");
    if (eps_floor <= 0.0) fail("abundance step: eps_floor must be positive");
    if (eta != 0.0 && (!graph || graph->pixels() != Y.cols()))
        fail("abundance step: neighborhood term requires a graph over the same pixels");

    const std::size_t L = Y.rows(), N = Y.cols(), p = A.cols();
    const auto& k = kernels::ops();
    Matrix next(p, N);

    for_each_chunk(N, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> r(L), upd(p);
        for (std::size_t px = begin; px < end; ++px) {
            const double* s = S.col(px);

            std::memcpy(r.data(), Y.col(px), L * sizeof(double));
            for (std::size_t n = 0; n < p; ++n)
                if (s[n] != 0.0) k.axpy(-s[n], A.col(n), r.data(), L);

            for (std::size_t n = 0; n < p; ++n) upd[n] = s[n] + mu * k.dot(A.col(n), r.data(), L);

            if (eta != 0.0) {
                const auto& nbr = graph->neighbors[px];
                const auto& rho = graph->rho[px];
                for (std::size_t j = 0; j < nbr.size(); ++j) {
                    const double* sj = S.col(nbr[j]);
                    const double c = mu * eta * rho[j];
                    for (std::size_t n = 0; n < p; ++n) upd[n] -= c * sign(s[n] - sj[n]);
                }
            }

            if (lambda != 0.0) {
                const double c = mu * lambda;
                for (std::size_t n = 0; n < p; ++n)
                    upd[n] -= c / std::sqrt(std::max(s[n], eps_floor));
            }

            for (std::size_t n = 0; n < p; ++n)
                if (!std::isfinite(upd[n]))
                    fail("abundance step: non-finite update at pixel " + std::to_string(px) +
                         "; reduce mu");

            project_simplex_inplace(upd.data(), p);
            std::memcpy(next.col(px), upd.data(), p * sizeof(double));
        }
    });
    return next;
}

Matrix l12_abundance_step(const Matrix& Y, const Matrix& A, const Matrix& S, double mu,
                          double lambda, double eps_floor, int threads) {
    return sparse_distributed_abundance_step(Y, A, S, nullptr, mu, 0.0, lambda, eps_floor,
                                             threads);
}

Matrix nmf_abundance_update(const Matrix& Y, const Matrix& A, const Matrix& S, int threads) {
    check_dims(Y, A, S);
    const std::size_t L = Y.rows(), N = Y.cols(), p = A.cols();
    const auto& k = kernels::ops();

    Matrix ata(p, p);
    for (std::size_t n = 0; n < p; ++n)
        for (std::size_t m = 0; m < p; ++m) ata(m, n) = k.dot(A.col(m), A.col(n), L);

    Matrix next(p, N);
    for_each_chunk(N, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> upd(p);
        for (std::size_t px = begin; px < end; ++px) {
            const double* s = S.col(px);
            for (std::size_t n = 0; n < p; ++n) {
                double den = 0.0;
                for (std::size_t m = 0; m < p; ++m) den += ata(n, m) * s[m];
                const double num = k.dot(A.col(n), Y.col(px), L);
                upd[n] = s[n] * num / std::max(den, DBL_MIN);
            }
            project_simplex_inplace(upd.data(), p);
            std::memcpy(next.col(px), upd.data(), p * sizeof(double));
        }
    });
    return next;
}

Init random_init(std::size_t bands, std::size_t p, std::size_t pixels, std::uint64_t seed) {
    Init init{Signatures{Matrix(bands, p)}, Abundances{Matrix(p, pixels)}};
    for (std::size_t j = 0; j < p; ++j) {
        double* col = init.signatures.a.col(j);
        double maxv = 0.0;
        for (std::size_t i = 0; i < bands; ++i) {
            col[i] = rng::uniform01(seed, kStreamInitSignatures, j * bands + i);
            maxv = std::max(maxv, col[i]);
        }
        if (maxv <= 0.0) maxv = 1.0;
        for (std::size_t i = 0; i < bands; ++i) col[i] /= maxv;
    }
    std::vector<double> center(p, 1.0 / static_cast<double>(p));
    fix_simplex_sum(center.data(), p);
    for (std::size_t px = 0; px < pixels; ++px)
        std::memcpy(init.abundances.s.col(px), center.data(), p * sizeof(double));
    return init;
}

UnmixResult run_unmixing(const Cube& cube, std::size_t p, Method method, const AlgoConfig& cfg,
                         const Init* init) {
    validate_cube(cube);
    const std::size_t L = cube.bands(), N = cube.pixels();
    if (p < 2) fail("run_unmixing: need p >= 2 endmembers");
    if (p > std::min(L, N))
        fail("run_unmixing: p = " + std::to_string(p) + " exceeds min(bands, pixels) = " +
             std::to_string(std::min(L, N)));
    if (cfg.mu <= 0.0) fail("run_unmixing: mu must be positive");
    if (cfg.eta < 0.0) fail("run_unmixing: eta must be nonnegative");

    const Matrix& Yraw = cube.data;
    Matrix Ypos = Yraw;
    for (std::size_t i = 0; i < Ypos.size(); ++i)
        if (Ypos.data()[i] < 0.0) Ypos.data()[i] = 0.0;

    auto resolve_lambda = [&]() -> double {
        switch (cfg.lambda_mode) {
            case LambdaMode::automatic:
                return auto_lambda(cube, cfg.lambda_denom);
            case LambdaMode::fixed:
                if (cfg.lambda_value < 0.0) fail("run_unmixing: lambda must be nonnegative");
                return cfg.lambda_value;
            case LambdaMode::zero:
                return 0.0;
        }
        return 0.0;
    };

    double eta_eff = 0.0, lambda_eff = 0.0;
    switch (method) {
        case Method::nmf:
            break;
        case Method::l12_nmf:
            lambda_eff = resolve_lambda();
            break;
        case Method::distributed:
            eta_eff = cfg.eta;
            break;
        case Method::sparse_distributed:
            eta_eff = cfg.eta;
            lambda_eff = resolve_lambda();
            break;
    }

    std::unique_ptr<NeighborGraph> graph;
    if (eta_eff != 0.0)
        graph = std::make_unique<NeighborGraph>(
            build_graph(cube, cfg.connectivity, cfg.threads));

    Matrix A, S;
    if (init) {
        if (init->signatures.bands() != L || init->signatures.count() != p ||
            init->abundances.count() != p || init->abundances.pixels() != N)
            fail("run_unmixing: init dimensions do not match cube/p");
        validate_signatures(init->signatures);
        A = init->signatures.a;
        S = init->abundances.s;
        for (std::size_t px = 0; px < N; ++px) project_simplex_inplace(S.col(px), p);
    } else {
        Init r = random_init(L, p, N, cfg.seed);
        A = std::move(r.signatures.a);
        S = std::move(r.abundances.s);
    }

    UnmixResult result;
    result.lambda_used = lambda_eff;
    result.eta_used = eta_eff;
    result.objective_trace.reserve(cfg.max_iter);

    double prev = 0.0;
    for (std::size_t t = 0; t < cfg.max_iter; ++t) {
        if (!cfg.fix_signatures) A = nmf_signature_update(Ypos, A, S, cfg.eps_floor, cfg.threads);

        if (method == Method::nmf)
            S = nmf_abundance_update(Ypos, A, S, cfg.threads);
        else
            S = sparse_distributed_abundance_step(Yraw, A, S, graph.get(), cfg.mu, eta_eff,
                                                  lambda_eff, cfg.eps_floor, cfg.threads);

        const double obj =
            objective(Yraw, A, S, graph.get(), eta_eff, lambda_eff, cfg.threads);
        if (!std::isfinite(obj)) fail("run_unmixing: objective diverged (non-finite)");
        result.objective_trace.push_back(obj);

        if (t > 0 && std::fabs(obj - prev) <= cfg.rel_tol * std::max(std::fabs(prev), DBL_MIN)) {
            result.converged = true;
            break;
        }
        prev = obj;
    }

    result.iterations_run = result.objective_trace.size();
    result.signatures = Signatures{std::move(A)};
    result.abundances = Abundances{std::move(S)};
    return result;
}

}  // namespace hsu
