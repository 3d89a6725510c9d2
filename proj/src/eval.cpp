#include "hsu/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "hsu/kernels.hpp"
#include "hsu/parallel.hpp"
#include "hsu/rng.hpp"

namespace hsu {

namespace {

constexpr std::uint64_t kTagRun = 0xC1;
constexpr std::uint64_t kTagScene = 0xC2;
constexpr std::uint64_t kTagNoise = 0xC3;
constexpr std::uint64_t kTagInit = 0xC4;

double angle_between(const double* a, const double* b, std::size_t n, const char* what) {
    if (std::memcmp(a, b, n * sizeof(double)) == 0) return 0.0;
    const auto& k = kernels::ops();
    const double na = std::sqrt(k.nrm2sq(a, n));
    const double nb = std::sqrt(k.nrm2sq(b, n));
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument(std::string(what) + ": zero-norm vector");
    double c = k.dot(a, b, n) / (na * nb);
    c = c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
    return std::acos(c);
}

// Kuhn-Munkres with potentials, O(p^3); cost is row = truth, col = estimate.
std::vector<std::size_t> assign_min_cost(const Matrix& cost) {
    const std::size_t n = cost.rows();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    // p[j] = truth row assigned to estimate column j (1-based)
    std::vector<std::size_t> est_to_truth(n);
    for (std::size_t j = 1; j <= n; ++j) est_to_truth[j - 1] = p[j] - 1;
    return est_to_truth;
}

double aggregate(const std::vector<double>& values, MeanKind kind) {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (const double v : values) s += kind == MeanKind::rms ? v * v : v;
    s /= static_cast<double>(values.size());
    return kind == MeanKind::rms ? std::sqrt(s) : s;
}

}  // namespace

double sad(const double* a, const double* a_hat, std::size_t n) {
    return angle_between(a, a_hat, n, "sad");
}

double sad(const std::vector<double>& a, const std::vector<double>& a_hat) {
    if (a.size() != a_hat.size()) throw std::invalid_argument("sad: length mismatch");
    return sad(a.data(), a_hat.data(), a.size());
}

double aad(const double* s, const double* s_hat, std::size_t n) {
    return angle_between(s, s_hat, n, "aad");
}

double aad(const std::vector<double>& s, const std::vector<double>& s_hat) {
    if (s.size() != s_hat.size()) throw std::invalid_argument("aad: length mismatch");
    return aad(s.data(), s_hat.data(), s.size());
}

std::vector<std::size_t> match_endmembers(const Matrix& a_true, const Matrix& a_est) {
    if (a_true.rows() != a_est.rows() || a_true.cols() != a_est.cols())
        throw std::invalid_argument(
            "match_endmembers: shape mismatch, truth is " + std::to_string(a_true.rows()) + "x" +
            std::to_string(a_true.cols()) + ", estimate is " + std::to_string(a_est.rows()) +
            "x" + std::to_string(a_est.cols()));
    const std::size_t p = a_true.cols();
    Matrix cost(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            cost(i, j) = sad(a_true.col(i), a_est.col(j), a_true.rows());
    return assign_min_cost(cost);
}

MetricReport evaluate(const Matrix& a_true, const Matrix& s_true, const Matrix& a_est,
                      const Matrix& s_est, MeanKind mean_kind) {
    if (a_true.rows() != a_est.rows() || a_true.cols() != a_est.cols())
        throw std::invalid_argument(
            "evaluate: signature shape mismatch, truth is " + std::to_string(a_true.rows()) +
            "x" + std::to_string(a_true.cols()) + ", estimate is " +
            std::to_string(a_est.rows()) + "x" + std::to_string(a_est.cols()));
    if (s_true.rows() != s_est.rows() || s_true.cols() != s_est.cols() ||
        s_true.rows() != a_true.cols())
        throw std::invalid_argument(
            "evaluate: abundance shape mismatch, truth is " + std::to_string(s_true.rows()) +
            "x" + std::to_string(s_true.cols()) + ", estimate is " +
            std::to_string(s_est.rows()) + "x" + std::to_string(s_est.cols()));

    const std::size_t p = a_true.cols(), N = s_true.cols();
    MetricReport report;
    report.matching = match_endmembers(a_true, a_est);

    // truth index -> estimated index
    std::vector<std::size_t> truth_to_est(p);
    for (std::size_t j = 0; j < p; ++j) truth_to_est[report.matching[j]] = j;

    report.sad_per_endmember.resize(p);
    std::vector<double> sads(p);
    for (std::size_t i = 0; i < p; ++i) {
        report.sad_per_endmember[i] =
            sad(a_true.col(i), a_est.col(truth_to_est[i]), a_true.rows());
        sads[i] = report.sad_per_endmember[i];
    }
    report.sad_mean = aggregate(sads, mean_kind);

    std::vector<double> aads(N);
    std::vector<double> perm(p);
    for (std::size_t k = 0; k < N; ++k) {
        const double* est = s_est.col(k);
        for (std::size_t i = 0; i < p; ++i) perm[i] = est[truth_to_est[i]];
        aads[k] = aad(s_true.col(k), perm.data(), p);
    }
    report.aad_mean = aggregate(aads, mean_kind);
    return report;
}

std::vector<SweepRow> run_sweep(const SpectralLibrary& lib, const SceneSpec& scene,
                                const std::vector<double>& snrs_db,
                                const std::vector<Method>& methods, std::size_t runs,
                                const AlgoConfig& algo, std::uint64_t master_seed,
                                MeanKind mean_kind, int threads) {
    if (runs < 1) throw std::invalid_argument("run_sweep: runs must be >= 1");
    if (snrs_db.empty()) throw std::invalid_argument("run_sweep: no SNR values");
    if (methods.empty()) throw std::invalid_argument("run_sweep: no methods");
    validate_scene_spec(scene);

    const std::size_t S = snrs_db.size(), M = methods.size();
    std::vector<SweepRow> rows(S * M * runs);

    // Cells (one scene + one noise realization each) run in parallel; the
    // methods inside a cell share the noisy cube and the init, and inner
    // algorithms run single-threaded to keep the pool flat.
    struct Cell {
        std::size_t si, run;
    };
    std::vector<Cell> cells;
    cells.reserve(S * runs);
    for (std::size_t si = 0; si < S; ++si)
        for (std::size_t run = 0; run < runs; ++run) cells.push_back({si, run});

    AlgoConfig inner = algo;
    inner.threads = 1;

    const std::size_t nworkers =
        std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic_flag error_claimed = ATOMIC_FLAG_INIT;
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t ci = next.fetch_add(1, std::memory_order_relaxed);
            if (ci >= cells.size()) return;
            try {
                const auto [si, run] = cells[ci];
                const std::uint64_t run_seed = rng::derive_seed(master_seed, kTagRun, run);

                SceneSpec sp = scene;
                sp.seed = rng::derive_seed(run_seed, kTagScene);
                const Scene truth = render_scene(lib, sp);
                const Cube noisy = add_noise(
                    truth.cube, {snrs_db[si], rng::derive_seed(run_seed, kTagNoise, si)});
                const Init init = random_init(noisy.bands(), sp.endmember_count(),
                                              noisy.pixels(),
                                              rng::derive_seed(run_seed, kTagInit));

                for (std::size_t mi = 0; mi < M; ++mi) {
                    const auto t0 = std::chrono::steady_clock::now();
                    const UnmixResult res =
                        run_unmixing(noisy, sp.endmember_count(), methods[mi], inner, &init);
                    const auto t1 = std::chrono::steady_clock::now();
                    const MetricReport rep =
                        evaluate(truth.signatures.a, truth.abundances.s, res.signatures.a,
                                 res.abundances.s, mean_kind);
                    SweepRow& row = rows[(si * M + mi) * runs + run];
                    row.snr_db = snrs_db[si];
                    row.method = methods[mi];
                    row.seed = run_seed;
                    row.sad_mean = rep.sad_mean;
                    row.aad_mean = rep.aad_mean;
                    row.iterations = res.iterations_run;
                    row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
                }
            } catch (...) {
                if (!error_claimed.test_and_set()) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(nworkers > 0 ? nworkers - 1 : 0);
    for (std::size_t t = 1; t < nworkers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);

    return rows;
}

}  // namespace hsu
