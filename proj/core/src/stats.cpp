#include "elastoplast/stats.hpp"

#include <cmath>

namespace elastoplast {

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    LinearFit fit;
    if (x.size() != y.size() || x.size() < 2) return fit;
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.intercept + fit.slope * x[i];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (x.size() > 2) {
        const double sigma2 = ss_res / (n - 2.0);
        fit.slope_se = std::sqrt(sigma2 * n / den);
    }
    fit.n = static_cast<int>(x.size());
    fit.ok = true;
    return fit;
}

TailFit fit_log_survival(const std::vector<double>& survival, double floor_level) {
    std::vector<double> ks, logs;
    TailFit out;
    for (std::size_t k = 0; k < survival.size(); ++k) {
        const double s = survival[k];
        if (s < 1.0 && s > floor_level) {
            if (out.window_lo < 0) out.window_lo = static_cast<int>(k);
            out.window_hi = static_cast<int>(k);
            ks.push_back(static_cast<double>(k));
            logs.push_back(std::log(s));
        }
    }
    if (ks.size() < 3) return out;
    const LinearFit lin = fit_linear(ks, logs);
    if (!lin.ok) return out;
    out.rate = -lin.slope;
    out.intercept = lin.intercept;
    out.r2 = lin.r2;
    out.rate_se = lin.slope_se;
    out.ok = true;
    return out;
}

std::vector<double> survival_curve(const std::vector<int>& samples, int K) {
    if (samples.empty()) throw ValidationError("survival_curve: no samples");
    std::vector<double> s(static_cast<std::size_t>(K) + 1, 0.0);
    for (int v : samples) {
        const int exceed_up_to = (v < 0) ? K : std::min(v - 1, K);
        // X > k holds for k < v (censored: for all k <= K)
        for (int k = 0; k <= exceed_up_to; ++k) s[k] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (auto& v : s) v *= inv;
    return s;
}

double stable_moment_rate(const std::vector<int>& samples, int K, double rate_cap) {
    if (samples.empty() || !(rate_cap > 0.0)) return 0.0;
    const int half = std::max(1, K / 2);
    double best = 0.0;
    for (int g = 1; g <= 19; ++g) {
        const double kappa = rate_cap * g / 20.0;
        double e_full = 0.0, e_half = 0.0;
        for (int v : samples) {
            const double vf = (v < 0) ? K : std::min(v, K);
            const double vh = std::min(vf, static_cast<double>(half));
            e_full += std::exp(kappa * vf);
            e_half += std::exp(kappa * vh);
        }
        if (!(std::isfinite(e_full) && std::isfinite(e_half)) || e_half <= 0.0) break;
        const double drift = std::abs(std::log(e_full) - std::log(e_half));
        if (drift < 0.02) best = kappa;
    }
    return best;
}

MeanSE mean_se(std::span<const double> v) {
    MeanSE out;
    if (v.empty()) return out;
    double s = 0.0;
    for (double x : v) s += x;
    out.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                           static_cast<double>(v.size()));
    }
    return out;
}

}  // namespace elastoplast
