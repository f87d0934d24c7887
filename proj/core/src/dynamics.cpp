#include "elastoplast/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace elastoplast {

State clamp_step(const State& x, const DriftModel& model, double forcing_increment, double h) {
    if (!x.finite() || !std::isfinite(forcing_increment))
        throw ValidationError("clamp_step: non-finite input");
    if (!(h > 0.0)) throw ValidationError("clamp_step: h must be > 0");
    if (std::abs(x.z) > 1.0)
        throw ValidationError("clamp_step: |z| > 1 violates the constraint set");
    State out = clamp_step_unchecked(x, model, forcing_increment, h);
    if (!out.finite()) throw SimulationError("clamp_step: produced non-finite state");
    return out;
}

Trajectory integrate(const State& x0, const DriftModel& model, const IncrementFn& increments,
                     const SolverConfig& cfg) {
    cfg.validate();
    if (!x0.in_domain()) throw ValidationError("integrate: x0 outside M");
    const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.h));
    if (steps == 0) throw ValidationError("integrate: horizon shorter than one step");

    Trajectory traj;
    traj.h = cfg.h;
    traj.states.reserve(steps + 1);
    traj.states.push_back(x0);
    State x = x0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double inc = increments(k, static_cast<double>(k) * cfg.h);
        if (!std::isfinite(inc)) throw SimulationError("integrate: non-finite forcing increment");
        x = clamp_step_unchecked(x, model, inc, cfg.h);
        if (!(std::abs(x.y) <= cfg.blowup_cap))
            throw SimulationError("integrate: |y| exceeded blow-up cap (model misconfigured?)");
        traj.states.push_back(x);
    }
    return traj;
}

Trajectory integrate_unforced(const State& x0, const DriftModel& model, const SolverConfig& cfg) {
    return integrate(x0, model, [](std::size_t, double) { return 0.0; }, cfg);
}

DriftReport validate_drift(const DriftModel& model, const DriftGrid& grid) {
    model.validate();
    if (grid.ny < 2 || grid.nz < 2 || !(grid.ymax > 0.0))
        throw ValidationError("validate_drift: empty or degenerate grid");

    DriftReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.ny; ++i) {
        const double y = -grid.ymax + 2.0 * grid.ymax * i / (grid.ny - 1);
        for (int j = 0; j < grid.nz; ++j) {
            const double z = -1.0 + 2.0 * j / (grid.nz - 1);
            const double v = y * model.f(y, z) + model.alpha * y * y - model.c_lyap;
            if (v > rep.max_violation) {
                rep.max_violation = v;
                rep.argmax = State{y, z};
            }
        }
    }
    rep.pass = rep.max_violation <= 1e-12;
    return rep;
}

DwellReport verify_dwell(const DriftModel& model, double r0, const SolverConfig& cfg,
                         const DwellGrid& grid) {
    model.validate();
    if (r0 < 0.0) throw ValidationError("verify_dwell: r0 must be >= 0");
    if (grid.radii < 0 || (grid.radii > 0 && grid.angles < 1))
        throw ValidationError("verify_dwell: empty grid");

    std::vector<State> starts;
    starts.push_back(model.p);
    if (r0 > 0.0) {
        for (int i = 1; i <= grid.radii; ++i) {
            const double r = r0 * i / grid.radii;
            for (int j = 0; j < grid.angles; ++j) {
                const double th = 2.0 * std::numbers::pi * j / grid.angles;
                State s{model.p.y + r * std::cos(th), model.p.z + r * std::sin(th)};
                if (std::abs(s.z) <= 1.0) starts.push_back(s);
            }
        }
    }

    SolverConfig dwell_cfg = cfg;
    dwell_cfg.T = model.t0;

    DwellReport rep;
    rep.pass = true;
    for (const auto& s : starts) {
        const Trajectory traj = integrate_unforced(s, model, dwell_cfg);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double d = distance(traj.states[k], model.p);
            if (d > rep.max_distance) {
                rep.max_distance = d;
                rep.worst_start = s;
            }
            if (d > model.smooth_radius && rep.pass) {
                rep.pass = false;
                rep.exit_time = traj.t(k);
            }
        }
    }
    return rep;
}

}  // namespace elastoplast
