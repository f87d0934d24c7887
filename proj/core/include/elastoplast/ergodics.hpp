#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "elastoplast/measure.hpp"
#include "elastoplast/noise.hpp"
#include "elastoplast/rng.hpp"
#include "elastoplast/stats.hpp"
#include "elastoplast/types.hpp"

namespace elastoplast {

/// One step of the discrete chain x_k = S(x_{k-1}; eta_k): integrates the
/// dynamics over [0, t0] at the sampler's substep, drawing the forcing from
/// rng. Reentrant; per-thread scratch is managed internally.
[[nodiscard]] State chain_step(const State& x, const DriftModel& model,
                               const IncrementSampler& sampler, Rng& rng);

// ---------------------------------------------------------------------------
// Lyapunov drift
// ---------------------------------------------------------------------------

struct DriftCheckPoint {
    State x0{};
    double mean_y2 = 0.0;  // Monte Carlo estimate of E y(t0)^2
    double se = 0.0;
    double bound = 0.0;  // q_theory * y0^2 + a_theory
    bool ok = false;
};

struct DriftCheckReport {
    std::vector<DriftCheckPoint> points;
    double q_hat = 0.0;  // least-squares fit of E y1^2 against y0^2
    double a_hat = 0.0;
    double q_theory = 0.0;  // exp(-2 alpha t0)
    double a_theory = 0.0;  // (2 C + 1) / (2 alpha)
    bool pass = false;
};

/// Monte Carlo check of the one-step drift of the quadratic part of V:
/// E_x y(t0)^2 <= q y0^2 + A with q = e^{-2 alpha t0}, A = (2C+1)/(2 alpha)
/// (equivalently E_x V(x_1) <= q V(x) + A + (1 - q) for V = 1 + y^2).
/// Pass iff every grid point satisfies the bound within 3 standard errors.
[[nodiscard]] DriftCheckReport lyapunov_drift_check(const DriftModel& model,
                                                    const NoiseSpec& noise,
                                                    const std::vector<State>& grid, int N,
                                                    double h, std::uint64_t seed,
                                                    unsigned threads = 0);

// ---------------------------------------------------------------------------
// Hitting times
// ---------------------------------------------------------------------------

struct HittingStats {
    std::vector<int> tau;  // first k >= 1 with x_k in B(p, delta); -1 if censored at K
    int censored = 0;
    int horizon = 0;
    std::vector<double> survival;  // P(tau > k), k = 0..K
    TailFit fit;                   // geometric-tail fit of the survival
    double kappa_hat = 0.0;        // largest stable exponential-moment rate
};

[[nodiscard]] HittingStats hitting_time(const DriftModel& model, const NoiseSpec& noise,
                                        const State& x0, const State& p, double delta, int K,
                                        int N, double h, std::uint64_t seed,
                                        unsigned threads = 0);

// ---------------------------------------------------------------------------
// One-step kernels and coupling
// ---------------------------------------------------------------------------

/// Histogram TV estimate of || P_1(x, .) - P_1(x', .) ||_var from N one-step
/// samples per kernel. With `paired` (default) both kernels consume the same
/// noise realizations, which removes most of the finite-sample inflation and
/// makes the estimate exactly 0 for x == x'.
[[nodiscard]] double estimate_kernel_tv(const DriftModel& model, const NoiseSpec& noise,
                                        const State& x, const State& x_prime, int N,
                                        const MeasureConfig& bins, double h, std::uint64_t seed,
                                        unsigned threads = 0, bool paired = true);

struct CouplingConfig {
    double delta_hat = 0.25;  // near-p trigger radius
    int aux_samples = 4096;   // kernel-estimate samples per side
    // Coarse near-p bins: at 4096 paired samples the min-mass estimate is
    // essentially unbiased on this grid, so the coupling-failure frequency
    // tracks the kernel TV.
    MeasureConfig bins{4.0, 16, 8};
    double aux_h = 0.0;  // substep for the auxiliary kernel samples; 0 = chain substep

    void validate() const {
        if (!(delta_hat > 0.0)) throw ValidationError("CouplingConfig: delta_hat must be > 0");
        if (aux_samples < 2) throw ValidationError("CouplingConfig: aux_samples too small");
        bins.validate();
    }
};

/// Approximate maximal coupling of the one-step kernels from x and x': both
/// kernels are estimated by aux_samples paired one-step draws binned on the
/// coupling grid; the two discrete bin distributions are coupled maximally and
/// the continuous representative is drawn uniformly from the retained samples
/// of the selected bin. P{draw not coupled} equals the binned TV estimate.
class BinnedCouplingKernel {
public:
    BinnedCouplingKernel(const DriftModel& model, const NoiseSpec& noise, const State& x,
                         const State& x_prime, const CouplingConfig& cfg, double chain_h,
                         Rng& rng);

    [[nodiscard]] double tv() const { return tv_; }

    struct Draw {
        State a{};
        State b{};
        bool coupled = false;
    };
    [[nodiscard]] Draw draw(Rng& rng) const;

private:
    std::vector<std::vector<State>> rep_a_;  // representatives per bin
    std::vector<std::vector<State>> rep_b_;
    std::vector<double> common_;      // cumulative min-mass per bin
    std::vector<double> residual_a_;  // cumulative residual mass per bin
    std::vector<double> residual_b_;
    double tv_ = 0.0;
};

struct CoupledPair {
    State x{};
    State x_prime{};
    bool coupled = false;
    int k = 0;
};

/// One step of the coupled chain: shared draw once coupled (or equal), the
/// binned maximal coupling when both states are in clos B(p, delta_hat), and
/// independent draws otherwise. Coupling is absorbing.
[[nodiscard]] CoupledPair coupled_step(const CoupledPair& pair, const DriftModel& model,
                                       const NoiseSpec& noise, const State& p,
                                       const CouplingConfig& cfg, double h, Rng& rng);

struct CouplingRunReport {
    std::vector<int> sigma;  // first step from which the pair agrees; -1 if censored
    int censored = 0;
    int horizon = 0;
    std::vector<double> survival;  // P(sigma > k)
    TailFit fit;
    double gamma_hat = 0.0;
    double v_sum = 0.0;  // V(x0) + V(x0')
};

[[nodiscard]] CouplingRunReport run_coupled_chains(const State& x0, const State& x0_prime,
                                                   const DriftModel& model,
                                                   const NoiseSpec& noise, const State& p,
                                                   const CouplingConfig& cfg, int K, int N,
                                                   double h, std::uint64_t seed,
                                                   unsigned threads = 0);

// ---------------------------------------------------------------------------
// Invariant measure and mixing rate
// ---------------------------------------------------------------------------

/// Long-run chain states after burn-in (thinned); the raw material behind the
/// empirical invariant measure, also usable as approximate stationary starts.
[[nodiscard]] std::vector<State> invariant_samples(const DriftModel& model,
                                                   const NoiseSpec& noise, long burn_in,
                                                   long count, int thinning, double h,
                                                   std::uint64_t seed);

/// Empirical invariant measure from a single long run. Throws when more than
/// 1% of the mass lands outside [-ymax, ymax] (widen ymax).
[[nodiscard]] EmpiricalMeasure empirical_invariant(const DriftModel& model,
                                                   const NoiseSpec& noise, long burn_in,
                                                   long count, int thinning,
                                                   const MeasureConfig& bins, double h,
                                                   std::uint64_t seed);

struct MixingConfig {
    MeasureConfig bins{10.0, 200, 100};
    long mu_burn = 1000;
    long mu_samples = 200000;
    int mu_thinning = 1;
    bool intra_step = false;  // also probe t = (k-1 + s) t0 for s in {1/4, 1/2, 3/4}
};

struct MixingReport {
    std::vector<double> tv;  // tv[k-1] = TV(P*_k lambda, mu_hat), k = 1..K
    double tv0 = 0.0;        // TV at k = 0
    double floor_hat = 0.0;  // split-sample self-distance, rescaled to the (N, M) pair
    TailFit fit;             // fit of log TV on the window above 2x the floor
    double gamma_hat = 0.0;
    double c_hat = 0.0;
    bool at_floor = false;  // true when the decay is unresolvable; gamma_hat is a lower bound
    double v_lambda = 0.0;  // <V, lambda>
    std::vector<std::pair<double, double>> intra_tv;  // (t, tv) at intra-step probes
};

/// TV decay of an N-chain ensemble started from lambda (a weighted list of
/// states) against the empirical invariant measure, with a log-linear rate fit
/// on the window above the estimator floor.
[[nodiscard]] MixingReport estimate_mixing_rate(const DriftModel& model, const NoiseSpec& noise,
                                                const std::vector<std::pair<State, double>>& starts,
                                                int K, int N, const MixingConfig& cfg, double h,
                                                std::uint64_t seed, unsigned threads = 0);

}  // namespace elastoplast
