#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastoplast {

/// Input or configuration violates a documented precondition. Mapped to exit code 1 by the CLI.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation failed at runtime (blow-up, no data to fit, ...). Mapped to exit code 2.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point of the state space M = R x [-1,1]: y is the unconstrained
/// (velocity-like) coordinate, z the constrained elastic coordinate.
struct State {
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] bool finite() const { return std::isfinite(y) && std::isfinite(z); }
    [[nodiscard]] bool in_domain() const { return finite() && std::abs(z) <= 1.0; }

    friend bool operator==(const State&, const State&) = default;
};

[[nodiscard]] inline double distance(const State& a, const State& b) {
    return std::hypot(a.y - b.y, a.z - b.z);
}

/// V(y,z) = 1 + y^2. Continuous, >= 1, compact level sets on M.
[[nodiscard]] inline double lyapunov_value(const State& x) { return 1.0 + x.y * x.y; }

/// Drift f together with its dissipation certificate y*f <= -alpha*y^2 + c_lyap,
/// the interior smooth point p and the reference interval length t0.
struct DriftModel {
    std::string name = "linear";
    std::function<double(double y, double z)> f;
    // Analytic partials are optional; finite differences are used when absent.
    std::function<double(double y, double z)> fy;
    std::function<double(double y, double z)> fz;
    double alpha = 1.0;
    double c_lyap = 0.0;
    State p{0.0, 0.0};
    double smooth_radius = 0.5;
    double t0 = 1.0;

    [[nodiscard]] double eval(const State& x) const { return f(x.y, x.z); }

    void validate() const {
        if (!f) throw ValidationError("DriftModel: drift function not set");
        if (!(alpha > 0.0)) throw ValidationError("DriftModel: alpha must be > 0");
        if (c_lyap < 0.0) throw ValidationError("DriftModel: c_lyap must be >= 0");
        if (!(std::abs(p.z) < 1.0)) throw ValidationError("DriftModel: |p.z| must be < 1");
        if (!(smooth_radius > 0.0)) throw ValidationError("DriftModel: smooth_radius must be > 0");
        if (!(t0 > 0.0 && t0 <= 1.0)) throw ValidationError("DriftModel: t0 must lie in (0, 1]");
    }

    /// Partial derivatives of f, analytic when supplied, else central differences.
    [[nodiscard]] double df_dy(double y, double z) const {
        if (fy) return fy(y, z);
        const double e = 1e-6;
        return (f(y + e, z) - f(y - e, z)) / (2.0 * e);
    }
    [[nodiscard]] double df_dz(double y, double z) const {
        if (fz) return fz(y, z);
        const double e = 1e-6;
        return (f(y, z + e) - f(y, z - e)) / (2.0 * e);
    }

    /// The reflected problem (y,z) -> (-y,-z). Satisfies the same dissipation
    /// certificate with identical constants; used by mirrored control synthesis.
    [[nodiscard]] DriftModel mirrored() const {
        DriftModel m = *this;
        auto base = f;
        m.f = [base](double y, double z) { return -base(-y, -z); };
        if (fy) {
            auto by = fy;
            m.fy = [by](double y, double z) { return by(-y, -z); };
        }
        if (fz) {
            auto bz = fz;
            m.fz = [bz](double y, double z) { return bz(-y, -z); };
        }
        m.p = State{-p.y, -p.z};
        m.name = name + "-mirrored";
        return m;
    }
};

/// Time step, horizon and seed for one integration run.
struct SolverConfig {
    double h = 1e-3;
    double T = 1.0;
    std::uint64_t seed = 0;
    double blowup_cap = 1e9;   // |y| beyond this aborts: unreachable for valid models

    void validate() const {
        if (!(h > 0.0)) throw ValidationError("SolverConfig: h must be > 0");
        if (!(T >= h)) throw ValidationError("SolverConfig: need h <= T");
    }
};

/// States on a uniform time grid t_i = i*h.
struct Trajectory {
    double h = 0.0;
    std::vector<State> states;
    std::optional<std::uint64_t> seed;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] double t(std::size_t i) const { return static_cast<double>(i) * h; }
    [[nodiscard]] const State& front() const { return states.front(); }
    [[nodiscard]] const State& back() const { return states.back(); }

    [[nodiscard]] double max_abs_z() const {
        double m = 0.0;
        for (const auto& s : states) m = std::max(m, std::abs(s.z));
        return m;
    }
};

}  // namespace elastoplast
