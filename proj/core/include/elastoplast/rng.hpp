#pragma once

#include <cstdint>
#include <random>

namespace elastoplast {

/// splitmix64 step; used to decorrelate stream seeds derived from a master seed.
[[nodiscard]] inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a9cda7e4e15dULL;
    return z ^ (z >> 31);
}

/// Deterministic per-stream seed: (master, stream) -> 64-bit seed.
/// Ensembles give stream = run index so any parallel schedule draws the same numbers.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

/// mt19937_64 with a hand-rolled polar-method normal sampler, so the produced
/// stream depends only on the seed, not on the standard library implementation.
class Rng {
public:
    Rng() : engine_(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t master, std::uint64_t stream) : engine_(derive_seed(master, stream)) {}

    [[nodiscard]] std::uint64_t bits() { return engine_(); }

    /// Uniform in [0, 1).
    [[nodiscard]] double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1].
    [[nodiscard]] double uniform_pos() { return 1.0 - uniform(); }

    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the polar (Marsaglia) method. One value cached.
    [[nodiscard]] double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Uniform integer in [0, n).
    [[nodiscard]] std::uint64_t below(std::uint64_t n) {
        // modulo bias is irrelevant here (n << 2^64) but reject anyway
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace elastoplast
