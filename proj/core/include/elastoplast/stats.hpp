#pragma once

#include <span>
#include <vector>

#include "elastoplast/types.hpp"

namespace elastoplast {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
    int n = 0;
    bool ok = false;
};

[[nodiscard]] LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Least-squares fit of log s_k against k over the window where the survival
/// is strictly below 1 and above `floor_level`. rate = -slope (> 0 for
/// geometric decay). Needs at least 3 window points.
struct TailFit {
    double rate = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double rate_se = 0.0;
    int window_lo = -1;
    int window_hi = -1;
    bool ok = false;
};

[[nodiscard]] TailFit fit_log_survival(const std::vector<double>& survival, double floor_level);

/// Survival curve P(X > k) for k = 0..K from integer samples; negative sample
/// values mean censored at the horizon (X > K).
[[nodiscard]] std::vector<double> survival_curve(const std::vector<int>& samples, int K);

/// Largest kappa on a grid below `rate_cap` such that the empirical
/// exponential moment E e^{kappa * min(X, K)} is stable under halving the
/// horizon (relative log-change < 2%). Returns 0 when no grid point is stable.
/// Censored samples contribute the horizon value, so the moment is never
/// extrapolated past the censoring horizon.
[[nodiscard]] double stable_moment_rate(const std::vector<int>& samples, int K, double rate_cap);

/// Mean and standard error of a sample.
struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};
[[nodiscard]] MeanSE mean_se(std::span<const double> v);

}  // namespace elastoplast
