#pragma once

#include <cstddef>
#include <functional>

namespace elastoplast {

/// Effective worker count: `requested` if > 0, else hardware concurrency
/// capped by the ELASTOPLAST_THREADS environment variable.
[[nodiscard]] unsigned effective_threads(unsigned requested = 0);

/// Runs fn(i) for i in [0, n) on a static block partition. Each index is
/// processed exactly once; callers own any output slot keyed by i, so results
/// do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

/// Splits [0, n) into contiguous chunks and runs fn(chunk, lo, hi), one chunk
/// per worker. Only safe for chunk-local accumulation whose merge is exact and
/// order-free (integer counts); floating reductions must go through per-index
/// slots instead.
void parallel_chunks(std::size_t n,
                     const std::function<void(unsigned chunk, std::size_t lo, std::size_t hi)>& fn,
                     unsigned threads = 0);

/// Number of chunks parallel_chunks will use for n items.
[[nodiscard]] unsigned chunk_count(std::size_t n, unsigned threads = 0);

}  // namespace elastoplast
