#include "elastoplast/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace elastoplast {

unsigned effective_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ELASTOPLAST_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads) {
    if (n == 0) return;
    const unsigned nt = std::min<std::size_t>(effective_threads(threads), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

unsigned chunk_count(std::size_t n, unsigned threads) {
    if (n == 0) return 0;
    return static_cast<unsigned>(std::min<std::size_t>(effective_threads(threads), n));
}

void parallel_chunks(std::size_t n,
                     const std::function<void(unsigned, std::size_t, std::size_t)>& fn,
                     unsigned threads) {
    const unsigned nc = chunk_count(n, threads);
    if (nc == 0) return;
    if (nc == 1) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nc);
    const std::size_t chunk = (n + nc - 1) / nc;
    for (unsigned t = 0; t < nc; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([t, lo, hi, &fn] { fn(t, lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace elastoplast
