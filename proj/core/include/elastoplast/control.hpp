#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "elastoplast/noise.hpp"
#include "elastoplast/types.hpp"

namespace elastoplast {

enum class SegmentCase { kickoff, ramp_to_plastic, plastic_drain, descend_from_corner, linear };

[[nodiscard]] const char* to_string(SegmentCase c);

/// One building block of a control schedule. Except for constant-control
/// segments, the block is a tracked profile: y(t) is stored in closed form
/// (polynomial or power law), z(t) follows the phase rule (interior: z' = y;
/// plastic: z frozen at +-1), and the control is u(t) = y'(t) - f(y(t), z(t)).
struct ControlSegment {
    SegmentCase tag = SegmentCase::linear;
    double duration = 0.0;

    enum class Profile { poly, power_law, constant_control };
    Profile profile = Profile::poly;

    // poly: y(t) = c[0] + c[1] t + c[2] t^2 + c[3] t^3 + c[4] t^4
    std::array<double, 5> c{};
    // power_law: y(t) = scale * (t/duration)^beta
    double beta = 0.0;
    double scale = 0.0;

    enum class ZRule { interior, plastic_upper, plastic_lower };
    ZRule zrule = ZRule::interior;
    double z_start = 0.0;  // interior: z(t) = z_start + int_0^t y

    double level = 0.0;  // constant_control: u == level

    State start{};
    State end{};

    [[nodiscard]] bool has_profile() const { return profile != Profile::constant_control; }
    [[nodiscard]] double y_at(double t) const;
    [[nodiscard]] double ydot_at(double t) const;
    [[nodiscard]] double z_at(double t) const;
    [[nodiscard]] State state_at(double t) const;
    [[nodiscard]] double u(double t, const DriftModel& model) const;

    /// Image under the symmetry (y, z, u) -> (-y, -z, -u).
    [[nodiscard]] ControlSegment mirrored() const;
};

struct ControlSchedule {
    std::vector<ControlSegment> segments;
    double total_time = 0.0;

    [[nodiscard]] bool empty() const { return segments.empty(); }
    [[nodiscard]] double u(double t, const DriftModel& model) const;
    [[nodiscard]] std::vector<double> junction_residuals(const DriftModel& model) const;
    [[nodiscard]] double max_junction_residual(const DriftModel& model) const;
    [[nodiscard]] const State& start_state() const { return segments.front().start; }
    [[nodiscard]] const State& end_state() const { return segments.back().end; }
    [[nodiscard]] ControlSchedule mirrored() const;
};

/// Quadratic boundary-reaching block: from x0 with y0 > 0, z0 in [-1,1) the
/// profile y = y0 + a t, z = z0 + y0 t + a t^2/2 with a = 2(1-z0-y0 eps)/eps^2
/// reaches z = 1 exactly at t = eps with y > 0. For y0 < 0 the mirrored block
/// with a = 2(1+z0+y0 eps)/eps^2 reaches z = -1. Requires 0 < eps < eps0 where
/// eps0 = (1-z0)/y0 (resp. (1+z0)/|y0|).
[[nodiscard]] ControlSegment ramp_to_plastic(const State& x0, double epsilon,
                                             const DriftModel& model);

/// Linear plastic unloading: from (y0, 1), y0 >= 0, the profile
/// y(t) = y0 (1 - t/T) on z == 1 ends at the corner (0, 1).
[[nodiscard]] ControlSegment plastic_drain(const State& x0, double t_tilde,
                                           const DriftModel& model);

/// Constant control u == level for a short time eps; requires f(x0)+level > 0
/// and checks by simulation that the segment exits with y > 0.
[[nodiscard]] ControlSegment kickoff(const State& x0, double level, double epsilon,
                                     const DriftModel& model);

/// From the corner (0,1) to a target with y_T < 0, |z_T| < 1: nonpositive
/// profile phi with phi(0)=0, phi(T)=y_T, int phi = z_T - 1. Uses the
/// power-law family phi = y_T (t/T)^beta when beta >= 1 and a quadratic
/// profile otherwise; requires T > (1 - z_T)/|y_T|.
[[nodiscard]] ControlSegment descend_from_corner(const State& target, double t_tilde,
                                                 const DriftModel& model);

/// Hold at the corner (0, +-1): y == 0, u = -f(0, z).
[[nodiscard]] ControlSegment hold_at_corner(double duration, bool upper);

/// Exact point-to-point control: continuous schedule routing x0 through the
/// corner (0,1) (mirrored through (0,-1) when xT.y > 0) and descending to xT.
/// All emitted profiles meet with zero slope, so u is continuous across
/// junctions and the forward Euler endpoint error is O(h).
[[nodiscard]] ControlSchedule synthesize_exact_control(const State& x0, const State& xT, double T,
                                                       const DriftModel& model);

/// Integrates the dynamics under a control schedule: each step consumes
/// h * u(t_left).
[[nodiscard]] Trajectory integrate(const State& x0, const DriftModel& model,
                                   const ControlSchedule& schedule, const SolverConfig& cfg);

struct ControlVerification {
    double endpoint_error = 0.0;
    double max_constraint_violation = 0.0;  // max(0, max|z| - 1); exact zero expected
    double max_junction_residual = 0.0;
    State endpoint{};
};

/// Forward-simulates the schedule from x0 and reports endpoint error,
/// constraint violation and junction continuity residuals.
[[nodiscard]] ControlVerification verify_control(const State& x0, const ControlSchedule& schedule,
                                                 const State& xT, const DriftModel& model,
                                                 const SolverConfig& cfg);

/// Coefficients of the linearization Y' = a(t) Y + b(t) Z + V, Z' = Y around a
/// reference trajectory, sampled on the reference grid.
struct LinearizedSystem {
    std::vector<double> a;
    std::vector<double> b;
    double h = 0.0;
    double t0 = 0.0;
};

/// Partial derivatives of f along the reference; the reference must stay
/// inside the smooth ball around p (certify with verify_dwell).
[[nodiscard]] LinearizedSystem linearize(const DriftModel& model, const Trajectory& reference);

/// Control V on [0, t0] steering the linearized system from (0,0) to (Y1, Z1):
/// V = phi' - a phi - b Phi with phi(t) = alpha t^2 + beta t solving
/// phi(t0) = Y1, int phi = Z1. Returned as direct forcing on the grid.
[[nodiscard]] ForcingPath linear_control(const LinearizedSystem& sys, double Y1, double Z1);

/// Endpoint of the linearized system under control V, integrated with Heun's
/// method (verification oracle for the linear problem, not the SVI path).
[[nodiscard]] std::pair<double, double> simulate_linear(const LinearizedSystem& sys,
                                                        const ForcingPath& V);

}  // namespace elastoplast
