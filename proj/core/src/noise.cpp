#include "elastoplast/noise.hpp"

#include <cmath>
#include <numbers>

#include "elastoplast/dynamics.hpp"

namespace elastoplast {

namespace {

std::size_t grid_steps(double t0, double h) {
    if (!(h > 0.0)) throw ValidationError("noise: h must be > 0");
    if (!(t0 > 0.0)) throw ValidationError("noise: t0 must be > 0");
    const double ratio = t0 / h;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-6)
        throw ValidationError("noise: h must divide t0");
    return n;
}

}  // namespace

double path_increment(const ForcingPath& path, std::size_t k, double solver_h) {
    if (std::abs(path.step - solver_h) > 1e-9 * std::max(path.step, solver_h))
        throw ValidationError("forcing path grid step does not match solver step");
    if (k + 1 >= path.values.size())
        throw ValidationError("forcing path shorter than integration horizon");
    if (path.kind == PathKind::path) return path.values[k + 1] - path.values[k];
    return solver_h * path.values[k];
}

Trajectory integrate(const State& x0, const DriftModel& model, const ForcingPath& forcing,
                     const SolverConfig& cfg) {
    forcing.validate();
    return integrate(
        x0, model, [&](std::size_t k, double) { return path_increment(forcing, k, cfg.h); }, cfg);
}

BasisValue basis_eval(int j, double t, double t0) {
    if (j < 1) throw ValidationError("basis_eval: j must be >= 1");
    if (!(t0 > 0.0)) throw ValidationError("basis_eval: t0 must be > 0");
    if (t < 0.0 || t > t0 * (1.0 + 1e-12))
        throw ValidationError("basis_eval: t outside [0, t0]");

    const double inv_sqrt = 1.0 / std::sqrt(t0);
    if (j == 1) return {inv_sqrt, t * inv_sqrt};

    const int m = j / 2;
    const double w = 2.0 * std::numbers::pi * m / t0;
    const double amp = std::sqrt(2.0 / t0);
    if (j % 2 == 0) {
        return {amp * std::cos(w * t), amp / w * std::sin(w * t)};
    }
    return {amp * std::sin(w * t), amp / w * (1.0 - std::cos(w * t))};
}

ForcingPath sample_brownian(double t0, double h, Rng& rng) {
    const std::size_t n = grid_steps(t0, h);
    ForcingPath path;
    path.kind = PathKind::path;
    path.step = h;
    path.values.resize(n + 1);
    path.values[0] = 0.0;
    const double s = std::sqrt(h);
    for (std::size_t k = 0; k < n; ++k) path.values[k + 1] = path.values[k] + s * rng.normal();
    return path;
}

ForcingPath sample_brownian(double t0, double h, std::uint64_t seed) {
    Rng rng(seed);
    return sample_brownian(t0, h, rng);
}

namespace {

/// Solves the small dense system G x = c in place (partial pivoting).
std::vector<double> solve_dense(std::vector<double> G, std::vector<double> c, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(G[r * n + col]) > std::abs(G[piv * n + col])) piv = r;
        if (std::abs(G[piv * n + col]) < 1e-14)
            throw SimulationError("project_path: singular discrete Gram matrix");
        if (piv != col) {
            for (int k = 0; k < n; ++k) std::swap(G[col * n + k], G[piv * n + k]);
            std::swap(c[col], c[piv]);
        }
        const double d = G[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double factor = G[r * n + col] / d;
            if (factor == 0.0) continue;
            for (int k = col; k < n; ++k) G[r * n + k] -= factor * G[col * n + k];
            c[r] -= factor * c[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = c[r];
        for (int k = r + 1; k < n; ++k) acc -= G[r * n + k] * x[k];
        x[r] = acc / G[r * n + r];
    }
    return x;
}

}  // namespace

std::vector<double> project_coefficients(const ForcingPath& path, const BasisSpec& basis) {
    basis.validate();
    path.validate();
    if (path.kind != PathKind::path)
        throw ValidationError("project_coefficients: expected a path-kind forcing");

    const int J = basis.J;
    const std::size_t n = path.steps();
    const double h = path.step;

    // phi_m at left endpoints and increments of e_n on the grid
    std::vector<double> phi(static_cast<std::size_t>(J) * n);
    std::vector<double> de(static_cast<std::size_t>(J) * (n + 1));
    for (int m = 0; m < J; ++m) {
        for (std::size_t k = 0; k <= n; ++k) {
            const BasisValue bv = basis_eval(m + 1, std::min(static_cast<double>(k) * h, basis.t0),
                                             basis.t0);
            de[m * (n + 1) + k] = bv.e;
            if (k < n) phi[m * n + k] = bv.phi;
        }
    }

    // Raw left-point Ito sums c_m = sum_k phi_m(t_k) (v_{k+1} - v_k).
    std::vector<double> c(J, 0.0);
    for (int m = 0; m < J; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += phi[m * n + k] * (path.values[k + 1] - path.values[k]);
        c[m] = acc;
    }

    // Discrete Gram G_{mn} = sum_k phi_m(t_k) (e_n(t_{k+1}) - e_n(t_k)); it is
    // I + O(h^2). Correcting by it makes extraction exact on reconstructions,
    // so the projection is idempotent to rounding.
    std::vector<double> G(static_cast<std::size_t>(J) * J, 0.0);
    for (int m = 0; m < J; ++m) {
        for (int nn = 0; nn < J; ++nn) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += phi[m * n + k] * (de[nn * (n + 1) + k + 1] - de[nn * (n + 1) + k]);
            G[m * J + nn] = acc;
        }
    }
    return solve_dense(std::move(G), std::move(c), J);
}

ForcingPath project_path(const ForcingPath& path, const BasisSpec& basis) {
    const std::vector<double> xi = project_coefficients(path, basis);
    const std::size_t n = path.steps();
    ForcingPath out;
    out.kind = PathKind::path;
    out.step = path.step;
    out.values.assign(n + 1, 0.0);
    for (int m = 0; m < basis.J; ++m) {
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = std::min(static_cast<double>(k) * path.step, basis.t0);
            out.values[k] += xi[m] * basis_eval(m + 1, t, basis.t0).e;
        }
    }
    out.values[0] = 0.0;
    return out;
}

double RhoSpec::sample(Rng& rng) const {
    switch (kind) {
        case Kind::normal:
            return scale * rng.normal();
        case Kind::laplace: {
            const double u = rng.uniform() - 0.5;
            const double mag = -std::log(1.0 - 2.0 * std::abs(u));
            return scale * (u < 0.0 ? -mag : mag);
        }
        case Kind::zero:
            return 0.0;
    }
    throw ValidationError("RhoSpec: density not sampleable");
}

RhoSpec RhoSpec::parse(const std::string& name) {
    if (name == "normal") return {Kind::normal, 1.0};
    if (name == "laplace") return {Kind::laplace, 1.0};
    if (name == "zero") return {Kind::zero, 0.0};
    throw ValidationError("RhoSpec: unknown density '" + name + "' (try normal, laplace, zero)");
}

std::string RhoSpec::name() const {
    switch (kind) {
        case Kind::normal: return "normal";
        case Kind::laplace: return "laplace";
        case Kind::zero: return "zero";
    }
    return "?";
}

void DecomposableLaw::validate() const {
    if (J < 1) throw ValidationError("DecomposableLaw: J must be >= 1");
    if (b.size() < static_cast<std::size_t>(J))
        throw ValidationError("DecomposableLaw: weight list shorter than J");
    for (int j = 0; j < J; ++j)
        if (b[j] == 0.0)
            throw ValidationError("DecomposableLaw: b_" + std::to_string(j + 1) + " must be nonzero");
    double tail = 0.0;
    for (std::size_t j = J; j < b.size(); ++j) tail += b[j] * b[j];
    if (tail > 1e-8)
        throw ValidationError("DecomposableLaw: squared-weight tail beyond J exceeds 1e-8");
}

ForcingPath sample_decomposable(const DecomposableLaw& law, const BasisSpec& basis, double h,
                                Rng& rng) {
    law.validate();
    basis.validate();
    if (basis.J != law.J)
        throw ValidationError("sample_decomposable: basis.J must match law.J");
    const std::size_t n = grid_steps(basis.t0, h);

    std::vector<double> xi(law.J);
    for (int j = 0; j < law.J; ++j) xi[j] = law.rho.sample(rng);

    ForcingPath out;
    out.kind = PathKind::direct;
    out.step = h;
    out.values.assign(n + 1, 0.0);
    for (int j = 0; j < law.J; ++j) {
        const double w = law.b[j] * xi[j];
        if (w == 0.0) continue;
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = std::min(static_cast<double>(k) * h, basis.t0);
            out.values[k] += w * basis_eval(j + 1, t, basis.t0).phi;
        }
    }
    return out;
}

ForcingPath sample_decomposable(const DecomposableLaw& law, const BasisSpec& basis, double h,
                                std::uint64_t seed) {
    Rng rng(seed);
    return sample_decomposable(law, basis, h, rng);
}

IncrementSampler::IncrementSampler(const NoiseSpec& spec, double t0, double h)
    : spec_(spec), t0_(t0), h_(h), sqrt_h_(std::sqrt(h)), substeps_(grid_steps(t0, h)) {
    if (spec_.kind == NoiseSpec::Kind::decomposable) {
        spec_.law.validate();
        const int J = spec_.law.J;
        phi_table_.resize(substeps_ * static_cast<std::size_t>(J));
        for (std::size_t k = 0; k < substeps_; ++k) {
            const double t = static_cast<double>(k) * h_;
            for (int j = 0; j < J; ++j)
                phi_table_[k * J + j] = spec_.law.b[j] * basis_eval(j + 1, t, t0_).phi;
        }
    }
}

void IncrementSampler::fill(std::span<double> increments, Rng& rng) const {
    if (increments.size() != substeps_)
        throw ValidationError("IncrementSampler: buffer size mismatch");
    switch (spec_.kind) {
        case NoiseSpec::Kind::none:
            for (auto& v : increments) v = 0.0;
            return;
        case NoiseSpec::Kind::white:
            for (auto& v : increments) v = sqrt_h_ * rng.normal();
            return;
        case NoiseSpec::Kind::decomposable: {
            const int J = spec_.law.J;
            std::vector<double> xi(static_cast<std::size_t>(J));  // local: fill is reentrant
            for (int j = 0; j < J; ++j) xi[j] = spec_.law.rho.sample(rng);
            for (std::size_t k = 0; k < substeps_; ++k) {
                double acc = 0.0;
                const double* row = &phi_table_[k * J];
                for (int j = 0; j < J; ++j) acc += row[j] * xi[j];
                increments[k] = h_ * acc;
            }
            return;
        }
    }
}

}  // namespace elastoplast
