#include "elastoplast/ergodics.hpp"

#include <algorithm>
#include <cmath>

#include "elastoplast/dynamics.hpp"
#include "elastoplast/parallel.hpp"

namespace elastoplast {

namespace {

// Streams >= kInternalStream are reserved for auxiliary chains (invariant run,
// floor replicates); ensemble runs use streams 0..N-1.
constexpr std::uint64_t kInternalStream = 1ULL << 62;

thread_local std::vector<double> tl_increments;

}  // namespace

State chain_step(const State& x, const DriftModel& model, const IncrementSampler& sampler,
                 Rng& rng) {
    tl_increments.resize(sampler.substeps());
    sampler.fill(tl_increments, rng);
    const double h = sampler.h();
    State cur = x;
    for (std::size_t k = 0; k < tl_increments.size(); ++k) {
        cur = clamp_step_unchecked(cur, model, tl_increments[k], h);
        if (!(std::abs(cur.y) <= 1e9))
            throw SimulationError("chain_step: |y| exceeded blow-up cap");
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Lyapunov drift
// ---------------------------------------------------------------------------

DriftCheckReport lyapunov_drift_check(const DriftModel& model, const NoiseSpec& noise,
                                      const std::vector<State>& grid, int N, double h,
                                      std::uint64_t seed, unsigned threads) {
    model.validate();
    if (grid.empty()) throw ValidationError("lyapunov_drift_check: empty start grid");
    if (N < 100) throw ValidationError("lyapunov_drift_check: ensemble too small (need N >= 100)");

    const IncrementSampler sampler(noise, model.t0, h);
    DriftCheckReport rep;
    rep.q_theory = std::exp(-2.0 * model.alpha * model.t0);
    rep.a_theory = (2.0 * model.c_lyap + 1.0) / (2.0 * model.alpha);
    rep.pass = true;

    std::vector<double> y2(static_cast<std::size_t>(N));
    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const State x0 = grid[g];
        if (!x0.in_domain()) throw ValidationError("lyapunov_drift_check: start outside M");
        parallel_for(
            static_cast<std::size_t>(N),
            [&](std::size_t i) {
                Rng rng(seed, g * static_cast<std::size_t>(N) + i);
                const State x1 = chain_step(x0, model, sampler, rng);
                y2[i] = x1.y * x1.y;
            },
            threads);
        DriftCheckPoint pt;
        pt.x0 = x0;
        const MeanSE ms = mean_se(y2);
        pt.mean_y2 = ms.mean;
        pt.se = ms.se;
        pt.bound = rep.q_theory * x0.y * x0.y + rep.a_theory;
        pt.ok = pt.mean_y2 <= pt.bound + 3.0 * pt.se;
        rep.pass = rep.pass && pt.ok;
        rep.points.push_back(pt);
        xs.push_back(x0.y * x0.y);
        ys.push_back(pt.mean_y2);
    }
    const LinearFit fit = fit_linear(xs, ys);
    if (fit.ok) {
        rep.q_hat = fit.slope;
        rep.a_hat = fit.intercept;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Hitting times
// ---------------------------------------------------------------------------

HittingStats hitting_time(const DriftModel& model, const NoiseSpec& noise, const State& x0,
                          const State& p, double delta, int K, int N, double h,
                          std::uint64_t seed, unsigned threads) {
    model.validate();
    if (!(delta > 0.0)) throw ValidationError("hitting_time: delta must be > 0");
    if (std::abs(p.z) + delta >= 1.0)
        throw ValidationError("hitting_time: ball B(p, delta) must avoid the boundary lines");
    if (K < 1 || N < 1) throw ValidationError("hitting_time: need K >= 1, N >= 1");

    const IncrementSampler sampler(noise, model.t0, h);
    HittingStats stats;
    stats.horizon = K;
    stats.tau.assign(static_cast<std::size_t>(N), -1);

    parallel_for(
        static_cast<std::size_t>(N),
        [&](std::size_t i) {
            Rng rng(seed, i);
            State x = x0;
            for (int k = 1; k <= K; ++k) {
                x = chain_step(x, model, sampler, rng);
                if (distance(x, p) < delta) {
                    stats.tau[i] = k;
                    break;
                }
            }
        },
        threads);

    for (int v : stats.tau) stats.censored += (v < 0);
    if (stats.censored == N)
        throw SimulationError(
            "hitting_time: all runs censored at the horizon; delta too small or noise too weak");

    stats.survival = survival_curve(stats.tau, K);
    stats.fit = fit_log_survival(stats.survival, 10.0 / static_cast<double>(N));
    if (stats.fit.ok && stats.fit.rate > 0.0)
        stats.kappa_hat = stable_moment_rate(stats.tau, K, stats.fit.rate);
    return stats;
}

// ---------------------------------------------------------------------------
// Kernel TV and coupling
// ---------------------------------------------------------------------------

double estimate_kernel_tv(const DriftModel& model, const NoiseSpec& noise, const State& x,
                          const State& x_prime, int N, const MeasureConfig& bins, double h,
                          std::uint64_t seed, unsigned threads, bool paired) {
    model.validate();
    bins.validate();
    if (N < 100) throw ValidationError("estimate_kernel_tv: need N >= 100");
    if (!x.in_domain() || !x_prime.in_domain())
        throw ValidationError("estimate_kernel_tv: states outside M");

    const IncrementSampler sampler(noise, model.t0, h);
    const unsigned nc = chunk_count(static_cast<std::size_t>(N), threads);
    std::vector<EmpiricalMeasure> ma(nc, EmpiricalMeasure(bins));
    std::vector<EmpiricalMeasure> mb(nc, EmpiricalMeasure(bins));

    parallel_chunks(
        static_cast<std::size_t>(N),
        [&](unsigned chunk, std::size_t lo, std::size_t hi) {
            std::vector<double> inc(sampler.substeps());
            for (std::size_t i = lo; i < hi; ++i) {
                Rng rng(seed, i);
                sampler.fill(inc, rng);
                State a = x;
                State b = x_prime;
                for (std::size_t k = 0; k < inc.size(); ++k)
                    a = clamp_step_unchecked(a, model, inc[k], sampler.h());
                if (!paired) {
                    Rng rng2(seed, kInternalStream + i);
                    sampler.fill(inc, rng2);
                }
                for (std::size_t k = 0; k < inc.size(); ++k)
                    b = clamp_step_unchecked(b, model, inc[k], sampler.h());
                ma[chunk].add(a);
                mb[chunk].add(b);
            }
        },
        threads);

    for (unsigned c = 1; c < nc; ++c) {
        ma[0].merge(ma[c]);
        mb[0].merge(mb[c]);
    }
    return tv_distance(ma[0], mb[0]);
}

BinnedCouplingKernel::BinnedCouplingKernel(const DriftModel& model, const NoiseSpec& noise,
                                           const State& x, const State& x_prime,
                                           const CouplingConfig& cfg, double chain_h, Rng& rng) {
    cfg.validate();
    const double aux_h = cfg.aux_h > 0.0 ? cfg.aux_h : chain_h;
    const IncrementSampler sampler(noise, model.t0, aux_h);
    const BinIndexer indexer(cfg.bins);
    const int B = indexer.bins();
    rep_a_.assign(B, {});
    rep_b_.assign(B, {});

    std::vector<double> inc(sampler.substeps());
    const int n = cfg.aux_samples;
    for (int j = 0; j < n; ++j) {
        sampler.fill(inc, rng);  // paired: both kernels consume the same draw
        State a = x;
        State b = x_prime;
        for (std::size_t k = 0; k < inc.size(); ++k) {
            a = clamp_step_unchecked(a, model, inc[k], sampler.h());
            b = clamp_step_unchecked(b, model, inc[k], sampler.h());
        }
        rep_a_[indexer.index(a)].push_back(a);
        rep_b_[indexer.index(b)].push_back(b);
    }

    common_.assign(B, 0.0);
    residual_a_.assign(B, 0.0);
    residual_b_.assign(B, 0.0);
    const double inv = 1.0 / static_cast<double>(n);
    double cum_common = 0.0, cum_ra = 0.0, cum_rb = 0.0;
    for (int bin = 0; bin < B; ++bin) {
        const double pa = static_cast<double>(rep_a_[bin].size()) * inv;
        const double pb = static_cast<double>(rep_b_[bin].size()) * inv;
        const double mn = std::min(pa, pb);
        cum_common += mn;
        cum_ra += pa - mn;
        cum_rb += pb - mn;
        common_[bin] = cum_common;
        residual_a_[bin] = cum_ra;
        residual_b_[bin] = cum_rb;
    }
    tv_ = 1.0 - cum_common;
}

namespace {

int pick_bin(const std::vector<double>& cumulative, double target) {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                     static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

}  // namespace

BinnedCouplingKernel::Draw BinnedCouplingKernel::draw(Rng& rng) const {
    Draw out;
    const double total_common = common_.empty() ? 0.0 : common_.back();
    const double ra_total = residual_a_.empty() ? 0.0 : residual_a_.back();
    const double rb_total = residual_b_.empty() ? 0.0 : residual_b_.back();
    const double u = rng.uniform();
    // rounding of the cumulative masses must not push the draw into an empty
    // residual: identical bin distributions always couple
    const bool common_branch =
        total_common > 0.0 && (u < total_common || ra_total <= 0.0 || rb_total <= 0.0);
    if (common_branch) {
        const double target = std::min(u, total_common * (1.0 - 1e-15));
        const int bin = pick_bin(common_, target);
        const auto& ra = rep_a_[bin];
        const auto& rb = rep_b_[bin];
        const std::size_t idx = rng.below(ra.size() + rb.size());
        const State v = idx < ra.size() ? ra[idx] : rb[idx - ra.size()];
        out.a = v;
        out.b = v;
        out.coupled = true;
        return out;
    }
    // residual branch: disjoint bin supports, so the two draws always differ
    {
        const int bin = pick_bin(residual_a_, rng.uniform() * ra_total);
        const auto& reps = rep_a_[bin];
        out.a = reps[rng.below(reps.size())];
    }
    {
        const int bin = pick_bin(residual_b_, rng.uniform() * rb_total);
        const auto& reps = rep_b_[bin];
        out.b = reps[rng.below(reps.size())];
    }
    out.coupled = false;
    return out;
}

namespace {

CoupledPair coupled_step_impl(const CoupledPair& pair, const DriftModel& model,
                              const NoiseSpec& noise, const State& p, const CouplingConfig& cfg,
                              const IncrementSampler& sampler, Rng& rng) {
    CoupledPair out = pair;
    out.k = pair.k + 1;

    if (pair.coupled || pair.x == pair.x_prime) {
        // shared draw; agreement is absorbing
        out.x = chain_step(pair.x, model, sampler, rng);
        out.x_prime = out.x;
        out.coupled = true;
        return out;
    }
    if (distance(pair.x, p) <= cfg.delta_hat && distance(pair.x_prime, p) <= cfg.delta_hat) {
        const BinnedCouplingKernel kernel(model, noise, pair.x, pair.x_prime, cfg, sampler.h(),
                                          rng);
        const auto d = kernel.draw(rng);
        out.x = d.a;
        out.x_prime = d.b;
        out.coupled = d.coupled;
        return out;
    }
    // independent copies of the driving noise
    out.x = chain_step(pair.x, model, sampler, rng);
    out.x_prime = chain_step(pair.x_prime, model, sampler, rng);
    out.coupled = false;
    return out;
}

}  // namespace

CoupledPair coupled_step(const CoupledPair& pair, const DriftModel& model, const NoiseSpec& noise,
                         const State& p, const CouplingConfig& cfg, double h, Rng& rng) {
    model.validate();
    cfg.validate();
    const IncrementSampler sampler(noise, model.t0, h);
    return coupled_step_impl(pair, model, noise, p, cfg, sampler, rng);
}

CouplingRunReport run_coupled_chains(const State& x0, const State& x0_prime,
                                     const DriftModel& model, const NoiseSpec& noise,
                                     const State& p, const CouplingConfig& cfg, int K, int N,
                                     double h, std::uint64_t seed, unsigned threads) {
    model.validate();
    cfg.validate();
    if (K < 1 || N < 1) throw ValidationError("run_coupled_chains: need K >= 1, N >= 1");

    const IncrementSampler sampler(noise, model.t0, h);
    CouplingRunReport rep;
    rep.horizon = K;
    rep.v_sum = lyapunov_value(x0) + lyapunov_value(x0_prime);
    rep.sigma.assign(static_cast<std::size_t>(N), -1);

    parallel_for(
        static_cast<std::size_t>(N),
        [&](std::size_t i) {
            Rng rng(seed, i);
            CoupledPair pair{x0, x0_prime, false, 0};
            if (pair.x == pair.x_prime) {
                rep.sigma[i] = 0;
                return;
            }
            for (int k = 1; k <= K; ++k) {
                pair = coupled_step_impl(pair, model, noise, p, cfg, sampler, rng);
                if (pair.coupled) {
                    rep.sigma[i] = k;
                    return;
                }
            }
        },
        threads);

    for (int v : rep.sigma) rep.censored += (v < 0);
    if (rep.censored == N)
        throw SimulationError("run_coupled_chains: no couplings observed before the horizon");

    rep.survival = survival_curve(rep.sigma, K);
    rep.fit = fit_log_survival(rep.survival, 10.0 / static_cast<double>(N));
    rep.gamma_hat = rep.fit.ok ? rep.fit.rate : 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Invariant measure and mixing
// ---------------------------------------------------------------------------

std::vector<State> invariant_samples(const DriftModel& model, const NoiseSpec& noise,
                                     long burn_in, long count, int thinning, double h,
                                     std::uint64_t seed) {
    model.validate();
    if (burn_in < 1) throw ValidationError("invariant_samples: burn_in must be >= 1");
    if (count < 1) throw ValidationError("invariant_samples: need count >= 1");
    if (thinning < 1) throw ValidationError("invariant_samples: thinning must be >= 1");

    const IncrementSampler sampler(noise, model.t0, h);
    Rng rng(seed, kInternalStream);
    State x = model.p;
    for (long k = 0; k < burn_in; ++k) x = chain_step(x, model, sampler, rng);

    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        for (int t = 0; t < thinning; ++t) x = chain_step(x, model, sampler, rng);
        out.push_back(x);
    }
    return out;
}

EmpiricalMeasure empirical_invariant(const DriftModel& model, const NoiseSpec& noise,
                                     long burn_in, long count, int thinning,
                                     const MeasureConfig& bins, double h, std::uint64_t seed) {
    const std::vector<State> samples = invariant_samples(model, noise, burn_in, count, thinning,
                                                         h, seed);
    EmpiricalMeasure mu(bins);
    for (const auto& s : samples) mu.add(s);
    if (mu.overflow_fraction() > 0.01)
        throw SimulationError("empirical_invariant: overflow mass " +
                              std::to_string(mu.overflow_fraction() * 100.0) +
                              "% exceeds 1%; widen ymax");
    return mu;
}

MixingReport estimate_mixing_rate(const DriftModel& model, const NoiseSpec& noise,
                                  const std::vector<std::pair<State, double>>& starts, int K,
                                  int N, const MixingConfig& cfg, double h, std::uint64_t seed,
                                  unsigned threads) {
    model.validate();
    cfg.bins.validate();
    if (starts.empty()) throw ValidationError("estimate_mixing_rate: empty start distribution");
    if (K < 1 || N < 100) throw ValidationError("estimate_mixing_rate: need K >= 1, N >= 100");

    // Reference measure and estimator floor from split halves of the same run.
    const std::vector<State> mu_states =
        invariant_samples(model, noise, cfg.mu_burn, cfg.mu_samples, cfg.mu_thinning, h, seed);
    EmpiricalMeasure mu(cfg.bins), mu_even(cfg.bins), mu_odd(cfg.bins);
    for (std::size_t i = 0; i < mu_states.size(); ++i) {
        mu.add(mu_states[i]);
        (i % 2 == 0 ? mu_even : mu_odd).add(mu_states[i]);
    }
    if (mu.overflow_fraction() > 0.01)
        throw SimulationError("estimate_mixing_rate: invariant run overflow exceeds 1%; widen ymax");

    MixingReport rep;
    // Split-half self-distance scales like sqrt(1/n1 + 1/n2); rescale it from
    // the (M/2, M/2) split to the actual (N, M) comparison so the floor
    // matches the plateau the TV estimates level off at.
    const double split_floor = tv_distance(mu_even, mu_odd);
    const double M = static_cast<double>(mu_states.size());
    rep.floor_hat = split_floor * std::sqrt(M / (4.0 * static_cast<double>(N)) + 0.25);

    // lambda: cumulative weights for categorical start sampling
    std::vector<double> cum;
    double wsum = 0.0;
    for (const auto& [s, w] : starts) {
        if (w < 0.0 || !s.in_domain())
            throw ValidationError("estimate_mixing_rate: invalid start distribution");
        wsum += w;
        cum.push_back(wsum);
    }
    if (!(wsum > 0.0)) throw ValidationError("estimate_mixing_rate: zero-mass start distribution");
    for (const auto& [s, w] : starts) rep.v_lambda += w / wsum * lyapunov_value(s);

    const IncrementSampler sampler(noise, model.t0, h);
    const std::vector<double> fractions = {0.25, 0.5, 0.75};
    const unsigned nc = chunk_count(static_cast<std::size_t>(N), threads);

    // snapshot measures: [chunk][k] plus optional intra-step probes
    std::vector<std::vector<EmpiricalMeasure>> snap(
        nc, std::vector<EmpiricalMeasure>(static_cast<std::size_t>(K) + 1, EmpiricalMeasure(cfg.bins)));
    std::vector<std::vector<EmpiricalMeasure>> intra;
    if (cfg.intra_step)
        intra.assign(nc, std::vector<EmpiricalMeasure>(fractions.size() * static_cast<std::size_t>(K),
                                                       EmpiricalMeasure(cfg.bins)));

    parallel_chunks(
        static_cast<std::size_t>(N),
        [&](unsigned chunk, std::size_t lo, std::size_t hi) {
            std::vector<double> inc(sampler.substeps());
            for (std::size_t i = lo; i < hi; ++i) {
                Rng rng(seed, i);
                const double u = rng.uniform() * wsum;
                const std::size_t pick =
                    std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
                                          starts.size() - 1);
                State x = starts[pick].first;
                snap[chunk][0].add(x);
                for (int k = 1; k <= K; ++k) {
                    sampler.fill(inc, rng);
                    State cur = x;
                    for (std::size_t s = 0; s < inc.size(); ++s) {
                        cur = clamp_step_unchecked(cur, model, inc[s], sampler.h());
                        if (cfg.intra_step) {
                            for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
                                const auto probe = static_cast<std::size_t>(
                                    fractions[fi] * static_cast<double>(inc.size()));
                                if (s + 1 == probe)
                                    intra[chunk][(k - 1) * fractions.size() + fi].add(cur);
                            }
                        }
                    }
                    x = cur;
                    snap[chunk][k].add(x);
                }
            }
        },
        threads);

    for (unsigned c = 1; c < nc; ++c) {
        for (int k = 0; k <= K; ++k) snap[0][k].merge(snap[c][k]);
        if (cfg.intra_step)
            for (std::size_t j = 0; j < intra[0].size(); ++j) intra[0][j].merge(intra[c][j]);
    }

    rep.tv0 = tv_distance(snap[0][0], mu);
    rep.tv.resize(K);
    for (int k = 1; k <= K; ++k) rep.tv[k - 1] = tv_distance(snap[0][k], mu);
    if (cfg.intra_step) {
        for (int k = 1; k <= K; ++k)
            for (std::size_t fi = 0; fi < fractions.size(); ++fi)
                rep.intra_tv.emplace_back((k - 1 + fractions[fi]) * model.t0,
                                          tv_distance(intra[0][(k - 1) * fractions.size() + fi], mu));
    }

    // Fit log TV against k while the signal stays clear of the floor; points
    // within a factor 2 of the floor are already noise-inflated and would
    // flatten the slope.
    std::vector<double> ks, logs;
    for (int k = 1; k <= K; ++k) {
        if (rep.tv[k - 1] > 2.0 * rep.floor_hat) {
            ks.push_back(static_cast<double>(k));
            logs.push_back(std::log(rep.tv[k - 1]));
        } else {
            break;
        }
    }
    if (ks.size() >= 3) {
        const LinearFit lin = fit_linear(ks, logs);
        rep.fit.rate = -lin.slope;
        rep.fit.intercept = lin.intercept;
        rep.fit.r2 = lin.r2;
        rep.fit.rate_se = lin.slope_se;
        rep.fit.window_lo = 1;
        rep.fit.window_hi = static_cast<int>(ks.size());
        rep.fit.ok = lin.ok;
        rep.gamma_hat = rep.fit.rate;
        rep.c_hat = std::exp(rep.fit.intercept);
    } else {
        rep.at_floor = true;
        rep.gamma_hat = rep.tv0 > rep.floor_hat && rep.floor_hat > 0.0
                            ? std::log(rep.tv0 / rep.floor_hat)
                            : 0.0;  // lower bound: TV fell below the floor within one step
        rep.c_hat = rep.tv0;
    }
    return rep;
}

}  // namespace elastoplast
