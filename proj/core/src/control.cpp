#include "elastoplast/control.hpp"

#include <algorithm>
#include <cmath>

#include "elastoplast/dynamics.hpp"

namespace elastoplast {

const char* to_string(SegmentCase c) {
    switch (c) {
        case SegmentCase::kickoff: return "kickoff";
        case SegmentCase::ramp_to_plastic: return "ramp_to_plastic";
        case SegmentCase::plastic_drain: return "plastic_drain";
        case SegmentCase::descend_from_corner: return "descend_from_corner";
        case SegmentCase::linear: return "linear";
    }
    return "?";
}

double ControlSegment::y_at(double t) const {
    switch (profile) {
        case Profile::poly:
            return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
        case Profile::power_law: {
            const double s = t / duration;
            return scale * std::pow(s, beta);
        }
        case Profile::constant_control:
            return start.y;  // state not tracked in closed form
    }
    return 0.0;
}

double ControlSegment::ydot_at(double t) const {
    switch (profile) {
        case Profile::poly:
            return c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * 4.0 * c[4]));
        case Profile::power_law: {
            if (t == 0.0) {
                if (beta > 1.0) return 0.0;
                if (beta == 1.0) return scale / duration;
                return std::copysign(std::numeric_limits<double>::infinity(), scale);
            }
            const double s = t / duration;
            return scale * beta / duration * std::pow(s, beta - 1.0);
        }
        case Profile::constant_control:
            return 0.0;
    }
    return 0.0;
}

double ControlSegment::z_at(double t) const {
    switch (zrule) {
        case ZRule::plastic_upper: return 1.0;
        case ZRule::plastic_lower: return -1.0;
        case ZRule::interior: break;
    }
    switch (profile) {
        case Profile::poly: {
            const double integral =
                t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * (c[3] / 4.0 + t * c[4] / 5.0))));
            return z_start + integral;
        }
        case Profile::power_law: {
            const double s = t / duration;
            return z_start + scale * duration / (beta + 1.0) * std::pow(s, beta + 1.0);
        }
        case Profile::constant_control:
            return start.z;
    }
    return z_start;
}

State ControlSegment::state_at(double t) const { return State{y_at(t), z_at(t)}; }

double ControlSegment::u(double t, const DriftModel& model) const {
    if (profile == Profile::constant_control) return level;
    const State x = state_at(t);
    return ydot_at(t) - model.f(x.y, x.z);
}

ControlSegment ControlSegment::mirrored() const {
    ControlSegment m = *this;
    for (auto& ci : m.c) ci = -ci;
    m.scale = -scale;
    m.level = -level;
    m.z_start = -z_start;
    if (zrule == ZRule::plastic_upper) m.zrule = ZRule::plastic_lower;
    else if (zrule == ZRule::plastic_lower) m.zrule = ZRule::plastic_upper;
    m.start = State{-start.y, -start.z};
    m.end = State{-end.y, -end.z};
    return m;
}

double ControlSchedule::u(double t, const DriftModel& model) const {
    if (segments.empty()) throw ValidationError("ControlSchedule: empty schedule");
    if (t < 0.0 || t > total_time * (1.0 + 1e-12))
        throw ValidationError("ControlSchedule: t outside [0, T]");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        if (t < acc + segments[i].duration) return segments[i].u(t - acc, model);
        acc += segments[i].duration;
    }
    return segments.back().u(std::min(t - acc, segments.back().duration), model);
}

std::vector<double> ControlSchedule::junction_residuals(const DriftModel& model) const {
    std::vector<double> res;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
        const double left = segments[i].u(segments[i].duration, model);
        const double right = segments[i + 1].u(0.0, model);
        res.push_back(std::abs(left - right));
    }
    return res;
}

double ControlSchedule::max_junction_residual(const DriftModel& model) const {
    double m = 0.0;
    for (double r : junction_residuals(model)) m = std::max(m, r);
    return m;
}

ControlSchedule ControlSchedule::mirrored() const {
    ControlSchedule out;
    out.total_time = total_time;
    out.segments.reserve(segments.size());
    for (const auto& s : segments) out.segments.push_back(s.mirrored());
    return out;
}

ControlSegment ramp_to_plastic(const State& x0, double epsilon, const DriftModel& model) {
    model.validate();
    if (!x0.in_domain()) throw ValidationError("ramp_to_plastic: x0 outside M");
    if (!(epsilon > 0.0)) throw ValidationError("ramp_to_plastic: epsilon must be > 0");
    if (x0.y == 0.0)
        throw ValidationError("ramp_to_plastic: y0 must be nonzero (kick off first)");

    ControlSegment seg;
    seg.tag = SegmentCase::ramp_to_plastic;
    seg.duration = epsilon;
    seg.profile = ControlSegment::Profile::poly;
    seg.zrule = ControlSegment::ZRule::interior;
    seg.z_start = x0.z;
    seg.start = x0;

    if (x0.y > 0.0) {
        if (!(x0.z < 1.0)) throw ValidationError("ramp_to_plastic: already at z = 1");
        const double eps0 = (1.0 - x0.z) / x0.y;
        if (!(epsilon < eps0))
            throw ValidationError("ramp_to_plastic: epsilon >= (1-z0)/y0 overshoots the boundary");
        const double a = 2.0 * (1.0 - x0.z - x0.y * epsilon) / (epsilon * epsilon);
        seg.c = {x0.y, a, 0.0, 0.0, 0.0};
        seg.end = State{x0.y + a * epsilon, 1.0};
    } else {
        if (!(x0.z > -1.0)) throw ValidationError("ramp_to_plastic: already at z = -1");
        const double eps0 = (1.0 + x0.z) / (-x0.y);
        if (!(epsilon < eps0))
            throw ValidationError("ramp_to_plastic: epsilon >= (1+z0)/|y0| overshoots the boundary");
        const double a = 2.0 * (1.0 + x0.z + x0.y * epsilon) / (epsilon * epsilon);
        seg.c = {x0.y, -a, 0.0, 0.0, 0.0};
        seg.end = State{x0.y - a * epsilon, -1.0};
    }
    return seg;
}

ControlSegment plastic_drain(const State& x0, double t_tilde, const DriftModel& model) {
    model.validate();
    if (x0.z != 1.0)
        throw ValidationError("plastic_drain: requires the plastic phase z0 = 1");
    if (!(x0.y >= 0.0)) throw ValidationError("plastic_drain: requires y0 >= 0");
    if (!(t_tilde > 0.0)) throw ValidationError("plastic_drain: duration must be > 0");

    ControlSegment seg;
    seg.tag = SegmentCase::plastic_drain;
    seg.duration = t_tilde;
    seg.profile = ControlSegment::Profile::poly;
    seg.zrule = ControlSegment::ZRule::plastic_upper;
    seg.z_start = 1.0;
    seg.c = {x0.y, -x0.y / t_tilde, 0.0, 0.0, 0.0};
    seg.start = x0;
    seg.end = State{0.0, 1.0};
    return seg;
}

ControlSegment kickoff(const State& x0, double level, double epsilon, const DriftModel& model) {
    model.validate();
    if (!x0.in_domain()) throw ValidationError("kickoff: x0 outside M");
    if (!(model.eval(x0) + level > 0.0))
        throw ValidationError("kickoff: requires f(x0) + level > 0 strictly");
    if (!(epsilon > 0.0)) throw ValidationError("kickoff: epsilon must be > 0");

    ControlSegment seg;
    seg.tag = SegmentCase::kickoff;
    seg.duration = epsilon;
    seg.profile = ControlSegment::Profile::constant_control;
    seg.level = level;
    seg.start = x0;

    SolverConfig cfg;
    cfg.h = epsilon / 1024.0;
    cfg.T = epsilon;
    const Trajectory traj =
        integrate(x0, model, [&](std::size_t, double) { return cfg.h * level; }, cfg);
    seg.end = traj.back();
    if (!(seg.end.y > 0.0))
        throw ValidationError("kickoff: epsilon too large, segment does not exit with y > 0");
    return seg;
}

namespace {

void check_nonpositive_profile(const ControlSegment& seg) {
    const int samples = 1024;
    for (int i = 0; i <= samples; ++i) {
        const double t = seg.duration * i / samples;
        if (seg.y_at(t) > 1e-12)
            throw ValidationError(
                "descend_from_corner: infeasible duration, profile not nonpositive");
    }
}

}  // namespace

ControlSegment descend_from_corner(const State& target, double t_tilde, const DriftModel& model) {
    model.validate();
    if (!(target.y < 0.0) || !(std::abs(target.z) < 1.0))
        throw ValidationError("descend_from_corner: target must have y < 0 and |z| < 1");
    const double tau = (1.0 - target.z) / (-target.y);
    if (!(t_tilde > tau))
        throw ValidationError("descend_from_corner: infeasible, need duration > (1-z_T)/|y_T|");

    ControlSegment seg;
    seg.tag = SegmentCase::descend_from_corner;
    seg.duration = t_tilde;
    seg.zrule = ControlSegment::ZRule::interior;
    seg.z_start = 1.0;
    seg.start = State{0.0, 1.0};
    seg.end = target;

    const double I = target.z - 1.0;
    const double beta = target.y * t_tilde / I - 1.0;
    if (beta >= 1.0) {
        seg.profile = ControlSegment::Profile::power_law;
        seg.scale = target.y;
        seg.beta = beta;
    } else {
        // quadratic profile phi = b t + c t^2 matching endpoint and integral
        seg.profile = ControlSegment::Profile::poly;
        const double b = (6.0 * I - 2.0 * target.y * t_tilde) / (t_tilde * t_tilde);
        const double cc = (3.0 * target.y * t_tilde - 6.0 * I) / (t_tilde * t_tilde * t_tilde);
        seg.c = {0.0, b, cc, 0.0, 0.0};
        check_nonpositive_profile(seg);
    }
    return seg;
}

ControlSegment hold_at_corner(double duration, bool upper) {
    if (!(duration > 0.0)) throw ValidationError("hold_at_corner: duration must be > 0");
    ControlSegment seg;
    seg.tag = SegmentCase::plastic_drain;
    seg.duration = duration;
    seg.profile = ControlSegment::Profile::poly;
    seg.zrule = upper ? ControlSegment::ZRule::plastic_upper : ControlSegment::ZRule::plastic_lower;
    seg.z_start = upper ? 1.0 : -1.0;
    seg.c = {0.0, 0.0, 0.0, 0.0, 0.0};
    seg.start = State{0.0, seg.z_start};
    seg.end = seg.start;
    return seg;
}

namespace {

// Interior bridge with zero slope at both ends: y(0) = y0, y'(0) = y'(d) = 0,
// int_0^d y = A. y is monotone between y0 and y0 + 2(A - y0 d)/d, so z moves
// monotonically by exactly A. Valid while (A - y0 d) has the travel sign.
ControlSegment interior_bridge(const State& x0, double A, double d, double z_target_boundary) {
    ControlSegment seg;
    seg.tag = SegmentCase::ramp_to_plastic;
    seg.duration = d;
    seg.profile = ControlSegment::Profile::poly;
    seg.zrule = ControlSegment::ZRule::interior;
    seg.z_start = x0.z;
    seg.start = x0;
    const double r = A - x0.y * d;
    seg.c = {x0.y, 0.0, 6.0 * r / (d * d * d), -4.0 * r / (d * d * d * d), 0.0};
    seg.end = State{x0.y + 2.0 * r / d, z_target_boundary};
    return seg;
}

// Plastic-phase smoothstep taking y from y_from to 0 with zero end slopes
// while z is frozen on the boundary.
ControlSegment plastic_relax(double y_from, double d, bool upper, SegmentCase tag) {
    ControlSegment seg;
    seg.tag = tag;
    seg.duration = d;
    seg.profile = ControlSegment::Profile::poly;
    seg.zrule = upper ? ControlSegment::ZRule::plastic_upper : ControlSegment::ZRule::plastic_lower;
    seg.z_start = upper ? 1.0 : -1.0;
    seg.c = {y_from, 0.0, -3.0 * y_from / (d * d), 2.0 * y_from / (d * d * d), 0.0};
    seg.start = State{y_from, seg.z_start};
    seg.end = State{0.0, seg.z_start};
    return seg;
}

// Quartic descent from the corner (0,1) to (y_T, z_T), y_T < 0: zero slope at
// both ends, exact endpoint and integral, nonpositive for m = tau/d >= 0.4.
ControlSegment quartic_descend(const State& target, double d) {
    const double I = target.z - 1.0;
    const double m = I / (target.y * d);
    const double A = 30.0 * m - 12.0;
    const double B = 28.0 - 60.0 * m;
    const double C = 30.0 * m - 15.0;
    ControlSegment seg;
    seg.tag = SegmentCase::descend_from_corner;
    seg.duration = d;
    seg.profile = ControlSegment::Profile::poly;
    seg.zrule = ControlSegment::ZRule::interior;
    seg.z_start = 1.0;
    seg.c = {0.0, 0.0, target.y * A / (d * d), target.y * B / (d * d * d),
             target.y * C / (d * d * d * d)};
    seg.start = State{0.0, 1.0};
    seg.end = target;
    return seg;
}

void check_profile_bounds(const ControlSegment& seg) {
    if (!seg.has_profile()) return;
    const int samples = 256;
    for (int i = 0; i <= samples; ++i) {
        const double t = seg.duration * i / samples;
        const State x = seg.state_at(t);
        if (std::abs(x.z) > 1.0 + 1e-9)
            throw SimulationError("synthesize_exact_control: profile leaves M");
        if (seg.zrule == ControlSegment::ZRule::plastic_upper && x.y < -1e-9)
            throw SimulationError("synthesize_exact_control: drain profile turned inward");
        if (seg.zrule == ControlSegment::ZRule::plastic_lower && x.y > 1e-9)
            throw SimulationError("synthesize_exact_control: raise profile turned inward");
    }
}

// Canonical synthesis for targets with y_T < 0, routed via the corner (0,1).
ControlSchedule synthesize_canonical(const State& x0, const State& xT, double T) {
    ControlSchedule sched;
    sched.total_time = T;

    const bool at_upper = (x0.z == 1.0);
    const bool at_lower = (x0.z == -1.0);
    const bool at_corner = at_upper && x0.y == 0.0;
    const bool upper_route = (x0.y >= 0.0);

    // Reach leg budget, per the eps0/2 vs T/8 split.
    double eps = 0.0;
    bool need_reach = false;
    if (!at_corner) {
        if (upper_route && !at_upper) {
            need_reach = true;
            const double eps0 = x0.y > 0.0 ? (1.0 - x0.z) / x0.y
                                           : std::numeric_limits<double>::infinity();
            eps = std::min(eps0 / 2.0, T / 8.0);
        } else if (!upper_route && !at_lower) {
            need_reach = true;
            const double eps0 = (1.0 + x0.z) / (-x0.y);
            eps = std::min(eps0 / 2.0, T / 8.0);
        }
    }

    const double tau = (1.0 - xT.z) / (-xT.y);
    const double descend_budget = T / 2.0 - eps;
    const double d_descend = std::min(descend_budget, 2.4 * tau);

    // Corner-phase legs between the reach leg and the descent.
    int corner_legs = 0;
    bool need_raise = false, need_cross = false, need_drain = false;
    if (at_corner) {
        corner_legs = 1;  // hold only
    } else if (upper_route) {
        need_drain = true;
        corner_legs = 2;  // drain + hold
    } else {
        need_raise = !(at_lower && x0.y == 0.0);
        need_cross = true;
        need_drain = true;
        corner_legs = 2 + (need_raise ? 1 : 0) + 1;  // [raise] + cross + drain + hold
    }

    const double rem = T - eps - d_descend;
    const double leg_d = rem / corner_legs;

    State cur = x0;
    if (need_reach) {
        const double A = upper_route ? (1.0 - cur.z) : -(1.0 + cur.z);
        sched.segments.push_back(interior_bridge(cur, A, eps, upper_route ? 1.0 : -1.0));
        cur = sched.segments.back().end;
    }
    if (need_raise) {
        sched.segments.push_back(plastic_relax(cur.y, leg_d, false, SegmentCase::kickoff));
        cur = sched.segments.back().end;
    }
    if (need_cross) {
        sched.segments.push_back(interior_bridge(cur, 2.0, leg_d, 1.0));
        cur = sched.segments.back().end;
    }
    if (need_drain) {
        sched.segments.push_back(plastic_relax(cur.y, leg_d, true, SegmentCase::plastic_drain));
        cur = sched.segments.back().end;
    }
    // The hold absorbs all remaining time so durations sum to T exactly.
    double used = d_descend;
    for (const auto& s : sched.segments) used += s.duration;
    sched.segments.push_back(hold_at_corner(T - used, true));
    sched.segments.push_back(quartic_descend(xT, d_descend));

    for (const auto& s : sched.segments) check_profile_bounds(s);
    return sched;
}

}  // namespace

ControlSchedule synthesize_exact_control(const State& x0, const State& xT, double T,
                                         const DriftModel& model) {
    model.validate();
    if (!x0.in_domain()) throw ValidationError("synthesize_exact_control: x0 outside M");
    if (!std::isfinite(T) || !(T > 0.0))
        throw ValidationError("synthesize_exact_control: T must be positive");
    if (xT.y == 0.0 || !(std::abs(xT.z) < 1.0))
        throw ValidationError(
            "synthesize_exact_control: target must lie in R_* x (-1,1) (y_T != 0, |z_T| < 1)");

    if (xT.y < 0.0) return synthesize_canonical(x0, xT, T);
    // Mirrored target: solve the reflected problem and map the schedule back.
    const ControlSchedule m = synthesize_canonical(State{-x0.y, -x0.z}, State{-xT.y, -xT.z}, T);
    return m.mirrored();
}

Trajectory integrate(const State& x0, const DriftModel& model, const ControlSchedule& schedule,
                     const SolverConfig& cfg) {
    return integrate(
        x0, model,
        [&](std::size_t, double t_left) { return cfg.h * schedule.u(t_left, model); }, cfg);
}

ControlVerification verify_control(const State& x0, const ControlSchedule& schedule,
                                   const State& xT, const DriftModel& model,
                                   const SolverConfig& cfg) {
    ControlVerification out;
    if (schedule.empty()) {
        if (cfg.T != 0.0)
            throw ValidationError("verify_control: empty schedule with a nonzero horizon");
        out.endpoint = x0;
        out.endpoint_error = distance(x0, xT);
        return out;
    }
    if (std::abs(schedule.total_time - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
        throw ValidationError("verify_control: schedule does not cover the horizon");

    const Trajectory traj = integrate(x0, model, schedule, cfg);
    out.endpoint = traj.back();
    out.endpoint_error = distance(out.endpoint, xT);
    out.max_constraint_violation = std::max(0.0, traj.max_abs_z() - 1.0);
    out.max_junction_residual = schedule.max_junction_residual(model);
    return out;
}

LinearizedSystem linearize(const DriftModel& model, const Trajectory& reference) {
    model.validate();
    if (reference.size() < 2) throw ValidationError("linearize: reference too short");
    LinearizedSystem sys;
    sys.h = reference.h;
    sys.t0 = reference.t(reference.size() - 1);
    sys.a.reserve(reference.size());
    sys.b.reserve(reference.size());
    for (const auto& x : reference.states) {
        if (distance(x, model.p) > model.smooth_radius)
            throw ValidationError("linearize: reference exits the smooth ball around p");
        sys.a.push_back(model.df_dy(x.y, x.z));
        sys.b.push_back(model.df_dz(x.y, x.z));
    }
    return sys;
}

ForcingPath linear_control(const LinearizedSystem& sys, double Y1, double Z1) {
    if (!(sys.t0 > 0.0) || sys.a.size() < 2)
        throw ValidationError("linear_control: degenerate linearized system");
    if (!std::isfinite(Y1) || !std::isfinite(Z1))
        throw ValidationError("linear_control: target must be finite");
    const double T = sys.t0;
    // phi(t) = alpha t^2 + beta t with phi(T) = Y1, int_0^T phi = Z1
    const double alpha = (3.0 * Y1 * T - 6.0 * Z1) / (T * T * T);
    const double beta = (6.0 * Z1 - 2.0 * Y1 * T) / (T * T);

    ForcingPath V;
    V.kind = PathKind::direct;
    V.step = sys.h;
    V.values.resize(sys.a.size());
    for (std::size_t i = 0; i < sys.a.size(); ++i) {
        const double t = std::min(static_cast<double>(i) * sys.h, T);
        const double phi = alpha * t * t + beta * t;
        const double phidot = 2.0 * alpha * t + beta;
        const double Phi = alpha * t * t * t / 3.0 + beta * t * t / 2.0;
        V.values[i] = phidot - sys.a[i] * phi - sys.b[i] * Phi;
    }
    return V;
}

std::pair<double, double> simulate_linear(const LinearizedSystem& sys, const ForcingPath& V) {
    if (V.values.size() != sys.a.size())
        throw ValidationError("simulate_linear: control grid does not match coefficients");
    const std::size_t n = sys.a.size() - 1;
    double Y = 0.0, Z = 0.0;
    const double h = sys.h;
    for (std::size_t k = 0; k < n; ++k) {
        const double f1y = sys.a[k] * Y + sys.b[k] * Z + V.values[k];
        const double f1z = Y;
        const double Yp = Y + h * f1y;
        const double Zp = Z + h * f1z;
        const double f2y = sys.a[k + 1] * Yp + sys.b[k + 1] * Zp + V.values[k + 1];
        const double f2z = Yp;
        Y += 0.5 * h * (f1y + f2y);
        Z += 0.5 * h * (f1z + f2z);
    }
    return {Y, Z};
}

}  // namespace elastoplast
