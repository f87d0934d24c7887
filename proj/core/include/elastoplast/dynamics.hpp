#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>

#include "elastoplast/types.hpp"

namespace elastoplast {

/// One explicit projected-Euler step of
///     dy = f(y,z) dt + d(forcing),   y in dz/dt + dg(z),
/// where g is the characteristic function of [-1,1]. The drift is evaluated at
/// the left endpoint; the z-update is clamped to [-1,1], which is the exact
/// resolvent of dg for this one-step map: in the interior dz = h*y, on z = +-1
/// with outward-pushing y the constraint freezes z (plastic phase).
///
/// `forcing_increment` is the integral of the forcing over the step: a Brownian
/// increment for white noise, h*u(t_left) for direct forcing.
[[nodiscard]] inline State clamp_step_unchecked(const State& x, const DriftModel& model,
                                                double forcing_increment, double h) {
    State out;
    out.y = x.y + h * model.f(x.y, x.z) + forcing_increment;
    out.z = std::clamp(x.z + h * x.y, -1.0, 1.0);
    return out;
}

/// Validating wrapper around clamp_step_unchecked.
[[nodiscard]] State clamp_step(const State& x, const DriftModel& model,
                               double forcing_increment, double h);

/// Per-step forcing increments: k is the step index, t_left = k*h.
using IncrementFn = std::function<double(std::size_t k, double t_left)>;

/// Integrates over [0, cfg.T] with step cfg.h, recording every grid state.
/// Throws SimulationError if |y| exceeds cfg.blowup_cap (misconfigured model).
[[nodiscard]] Trajectory integrate(const State& x0, const DriftModel& model,
                                   const IncrementFn& increments, const SolverConfig& cfg);

/// Endpoint-only integration; the hot path used by ensembles.
/// F is any callable double(std::size_t k, double t_left).
template <typename F>
[[nodiscard]] State integrate_endpoint(State x, const DriftModel& model, F&& increments,
                                       double h, std::size_t steps, double blowup_cap = 1e9) {
    for (std::size_t k = 0; k < steps; ++k) {
        x = clamp_step_unchecked(x, model, increments(k, static_cast<double>(k) * h), h);
        if (!(std::abs(x.y) <= blowup_cap))
            throw SimulationError("integrate: |y| exceeded blow-up cap (model misconfigured?)");
    }
    return x;
}

[[nodiscard]] Trajectory integrate_unforced(const State& x0, const DriftModel& model,
                                            const SolverConfig& cfg);

/// Grid specification for validate_drift.
struct DriftGrid {
    double ymax = 10.0;
    int ny = 201;
    int nz = 41;
};

struct DriftReport {
    bool pass = false;
    double max_violation = 0.0;  // max over the grid of y*f(y,z) + alpha*y^2 - c_lyap
    State argmax{};
};

/// Checks the dissipation certificate y*f <= -alpha*y^2 + c_lyap on a grid
/// covering [-ymax, ymax] x [-1, 1]. Pass iff the violation is <= 1e-12.
[[nodiscard]] DriftReport validate_drift(const DriftModel& model, const DriftGrid& grid = {});

struct DwellGrid {
    int radii = 4;    // rings in (0, r0]; the center point is always included
    int angles = 16;  // samples per ring
};

struct DwellReport {
    bool pass = false;
    double max_distance = 0.0;  // worst distance from p over all starts and times
    State worst_start{};
    double exit_time = -1.0;  // first time some trajectory left the smooth ball, -1 if none
};

/// Simulates the unforced system from a grid of starts in B_M(p, r0) over
/// [0, t0] and checks that every trajectory stays inside B_M(p, smooth_radius).
/// Certifies the chosen reference time t0 for the given model.
[[nodiscard]] DwellReport verify_dwell(const DriftModel& model, double r0,
                                       const SolverConfig& cfg, const DwellGrid& grid = {});

}  // namespace elastoplast
