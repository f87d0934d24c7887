#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elastoplast/rng.hpp"
#include "elastoplast/types.hpp"

namespace elastoplast {

/// How a sampled function on [0, T0] forces the dynamics:
///  - path:   values are eta(t); the integrator consumes increments (white-noise reading)
///  - direct: values are zeta(t); the integrator consumes h * zeta(t_left)
enum class PathKind { path, direct };

struct ForcingPath {
    PathKind kind = PathKind::path;
    double step = 0.0;
    std::vector<double> values;

    [[nodiscard]] std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
    [[nodiscard]] double duration() const { return step * static_cast<double>(steps()); }

    void validate() const {
        if (!(step > 0.0)) throw ValidationError("ForcingPath: step must be > 0");
        if (values.size() < 2) throw ValidationError("ForcingPath: needs at least two samples");
        if (kind == PathKind::path && values.front() != 0.0)
            throw ValidationError("ForcingPath: path kind requires values[0] = 0");
    }
};

/// Increment consumed by the k-th solver step when driven by this path.
[[nodiscard]] double path_increment(const ForcingPath& path, std::size_t k, double solver_h);

/// Integrates the dynamics driven by a sampled forcing path: path kind
/// consumes increments, direct kind consumes h * zeta(t_left). The path grid
/// must match the solver step and cover the horizon.
[[nodiscard]] Trajectory integrate(const State& x0, const DriftModel& model,
                                   const ForcingPath& forcing, const SolverConfig& cfg);

/// j-th element of the orthonormal trigonometric basis of L^2((0,T0)) and its
/// antiderivative e_j(t) = int_0^t phi_j. Indexing: phi_1 = 1/sqrt(T0),
/// phi_{2m} = sqrt(2/T0) cos(2 pi m t / T0), phi_{2m+1} = sqrt(2/T0) sin(2 pi m t / T0).
struct BasisValue {
    double phi = 0.0;
    double e = 0.0;
};
[[nodiscard]] BasisValue basis_eval(int j, double t, double t0);

struct BasisSpec {
    double t0 = 1.0;
    int J = 64;

    void validate() const {
        if (!(t0 > 0.0)) throw ValidationError("BasisSpec: t0 must be > 0");
        if (J < 1) throw ValidationError("BasisSpec: J must be >= 1");
    }
};

/// Discrete Brownian path on [0, T0]: independent N(0, h) increments summed
/// from 0. Reproducible from the seed.
[[nodiscard]] ForcingPath sample_brownian(double t0, double h, std::uint64_t seed);
[[nodiscard]] ForcingPath sample_brownian(double t0, double h, Rng& rng);

/// Coefficients xi_n = int phi_n d(eta) of a rough path, extracted by left-point
/// Riemann-Stieltjes sums and corrected by the discrete Gram matrix so that
/// extraction is exactly inverse to reconstruction on span{e_1..e_J}.
[[nodiscard]] std::vector<double> project_coefficients(const ForcingPath& path,
                                                       const BasisSpec& basis);

/// P_{F_J} applied to the path: reconstruction sum_n xi_n e_n on the same grid.
[[nodiscard]] ForcingPath project_path(const ForcingPath& path, const BasisSpec& basis);

/// Scalar density for the decomposable coefficients.
struct RhoSpec {
    enum class Kind { normal, laplace, zero };
    Kind kind = Kind::normal;
    double scale = 1.0;

    [[nodiscard]] double sample(Rng& rng) const;
    [[nodiscard]] static RhoSpec parse(const std::string& name);
    [[nodiscard]] std::string name() const;
};

/// Law eta = sum_j b_j xi_j phi_j with i.i.d. coefficients of density rho,
/// truncated at level J.
struct DecomposableLaw {
    std::vector<double> b;
    RhoSpec rho;
    int J = 0;

    void validate() const;
};

/// Draws xi_1..xi_J i.i.d. from rho and samples sum_j b_j xi_j phi_j on the
/// grid. The result is direct forcing.
[[nodiscard]] ForcingPath sample_decomposable(const DecomposableLaw& law, const BasisSpec& basis,
                                              double h, std::uint64_t seed);
[[nodiscard]] ForcingPath sample_decomposable(const DecomposableLaw& law, const BasisSpec& basis,
                                              double h, Rng& rng);

/// Noise selection for ensemble experiments.
struct NoiseSpec {
    enum class Kind { none, white, decomposable };
    Kind kind = Kind::white;
    DecomposableLaw law;

    [[nodiscard]] static NoiseSpec none() { return {Kind::none, {}}; }
    [[nodiscard]] static NoiseSpec white() { return {Kind::white, {}}; }
    [[nodiscard]] static NoiseSpec decomposable(DecomposableLaw l) {
        return {Kind::decomposable, std::move(l)};
    }
};

/// Fills per-substep forcing increments for one chain step of length t0.
/// White noise draws sqrt(h)*N(0,1) per substep (identical in law and in bits
/// to consuming a sample_brownian path with the same stream); decomposable
/// noise draws fresh coefficients per chain step and evaluates the truncated
/// sum at substep left endpoints. Basis values are precomputed once.
class IncrementSampler {
public:
    IncrementSampler(const NoiseSpec& spec, double t0, double h);

    void fill(std::span<double> increments, Rng& rng) const;

    [[nodiscard]] std::size_t substeps() const { return substeps_; }
    [[nodiscard]] double h() const { return h_; }

private:
    NoiseSpec spec_;
    double t0_;
    double h_;
    double sqrt_h_;
    std::size_t substeps_;
    // decomposable: phi_table_[k*J + j] = b_j * phi_j(t_k), t_k = k*h
    std::vector<double> phi_table_;
};

}  // namespace elastoplast
