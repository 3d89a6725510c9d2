#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hsu {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Work over [0, n) is split into fixed-size chunks regardless of thread count,
// and per-chunk partials are combined in chunk order. Numeric results are
// therefore identical for every schedule and every thread count.
inline constexpr std::size_t kParallelChunk = 1024;

inline std::size_t chunk_count(std::size_t n) {
    return (n + kParallelChunk - 1) / kParallelChunk;
}

// fn(chunk_index, begin, end)
template <class Fn>
void for_each_chunk(std::size_t n, int threads, Fn&& fn) {
    const std::size_t chunks = chunk_count(n);
    if (chunks == 0) return;
    const int nthreads = resolve_threads(threads);
    if (nthreads <= 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::atomic_flag error_claimed = ATOMIC_FLAG_INIT;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks) return;
            try {
                fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
            } catch (...) {
                if (!error_claimed.test_and_set()) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(nthreads), chunks);
    std::vector<std::thread> pool;
    pool.reserve(nw - 1);
    for (std::size_t t = 1; t < nw; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Sums fn(begin, end) over chunks, combining partials in chunk order.
template <class Fn>
double reduce_chunks(std::size_t n, int threads, Fn&& fn) {
    std::vector<double> partial(chunk_count(n), 0.0);
    for_each_chunk(n, threads,
                   [&](std::size_t c, std::size_t b, std::size_t e) { partial[c] = fn(b, e); });
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum;
}

}  // namespace hsu
