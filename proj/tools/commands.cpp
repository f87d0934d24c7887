#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elastoplast/config.hpp"
#include "elastoplast/control.hpp"
#include "elastoplast/csv.hpp"
#include "elastoplast/dynamics.hpp"
#include "elastoplast/ergodics.hpp"
#include "elastoplast/measure.hpp"
#include "elastoplast/noise.hpp"
#include "elastoplast/parallel.hpp"

namespace elastoplast::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

struct RunDir {
    fs::path dir;
    std::vector<std::string> files;

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(dir);
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw SimulationError("cannot write " + (dir / name).string());
        out << content;
        files.push_back(name);
    }
};

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

using Clock = std::chrono::steady_clock;

void finish_run(RunDir& run, const std::string& experiment, const ExperimentConfig& cfg,
                const json& metrics, Clock::time_point t_begin) {
    const double wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t_begin).count();
    run.write("resolved_config.json", cfg.canonical_json());
    json manifest;
    manifest["experiment"] = experiment;
    manifest["config_hash"] = hash_hex(cfg.config_hash());
    manifest["version"] = kVersion;
    manifest["wall_clock_ms"] = wall_ms;
    manifest["metrics"] = metrics;
    manifest["files"] = run.files;
    run.write("manifest.json", manifest.dump(2) + "\n");
}

State point(const std::array<double, 2>& a) { return State{a[0], a[1]}; }

json state_json(const State& x) { return json::array({x.y, x.z}); }

json tail_fit_json(const TailFit& fit) {
    json j;
    j["ok"] = fit.ok;
    j["rate"] = fit.rate;
    j["rate_se"] = fit.rate_se;
    j["intercept"] = fit.intercept;
    j["r2"] = fit.r2;
    j["window"] = {fit.window_lo, fit.window_hi};
    return j;
}

std::vector<std::pair<State, double>> start_distribution(const ExperimentConfig& cfg) {
    std::vector<std::pair<State, double>> starts;
    if (cfg.experiment.starts.empty()) {
        starts.emplace_back(point(cfg.experiment.from), 1.0);
    } else {
        for (const auto& s : cfg.experiment.starts)
            starts.emplace_back(State{s[0], s[1]}, s[2]);
    }
    return starts;
}

MeasureConfig measure_bins(const ExperimentConfig& cfg) {
    return MeasureConfig{cfg.experiment.ymax, cfg.experiment.bins_y, cfg.experiment.bins_z};
}

CouplingConfig coupling_config(const ExperimentConfig& cfg) {
    CouplingConfig cc;
    cc.delta_hat = cfg.experiment.delta_hat;
    cc.aux_samples = cfg.experiment.aux_samples;
    cc.aux_h = cfg.experiment.aux_h;
    cc.bins = MeasureConfig{cfg.experiment.coupling_ymax, cfg.experiment.coupling_bins_y,
                            cfg.experiment.coupling_bins_z};
    return cc;
}

// Forcing over [0, T] for the simulate command: white noise accumulates a
// Brownian path, decomposable noise draws fresh coefficients per t0-segment.
struct SimulatedForcing {
    std::vector<double> increments;  // consumed by the integrator
    std::vector<double> series;      // exported as t,value
};

SimulatedForcing build_forcing(const ExperimentConfig& cfg, const DriftModel& model, double h,
                               std::size_t steps) {
    SimulatedForcing out;
    out.increments.assign(steps, 0.0);
    const NoiseSpec spec = cfg.build_noise();
    if (spec.kind == NoiseSpec::Kind::none) {
        out.series.assign(steps + 1, 0.0);
        return out;
    }
    Rng rng(cfg.seed, 0);
    if (spec.kind == NoiseSpec::Kind::white) {
        out.series.assign(steps + 1, 0.0);
        const double s = std::sqrt(h);
        for (std::size_t k = 0; k < steps; ++k) {
            out.increments[k] = s * rng.normal();
            out.series[k + 1] = out.series[k] + out.increments[k];
        }
        return out;
    }
    out.series.assign(steps + 1, 0.0);
    const IncrementSampler sampler(spec, model.t0, h);
    const std::size_t per = sampler.substeps();
    if (steps % per != 0)
        throw ValidationError("simulate: horizon must be a whole number of t0 segments "
                              "for decomposable noise");
    std::vector<double> seg(per);
    for (std::size_t offset = 0; offset < steps; offset += per) {
        sampler.fill(seg, rng);
        for (std::size_t k = 0; k < per; ++k) {
            out.increments[offset + k] = seg[k];
            out.series[offset + k] = seg[k] / h;  // direct forcing values zeta(t)
        }
    }
    out.series[steps] = out.series[steps - 1];
    return out;
}

// --------------------------------------------------------------------------
// subcommands
// --------------------------------------------------------------------------

int cmd_validate(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const DriftGrid grid{cfg.experiment.ymax, 201, 41};
    const DriftReport drift = validate_drift(model, grid);

    json metrics;
    metrics["drift"] = drift.pass ? "pass" : "fail";
    metrics["max_violation"] = drift.max_violation;
    metrics["argmax"] = state_json(drift.argmax);

    if (cfg.experiment.r0 > 0.0) {
        SolverConfig scfg{cfg.solver_h(), model.t0, cfg.seed};
        const DwellReport dwell = verify_dwell(model, cfg.experiment.r0, scfg);
        metrics["dwell"] = dwell.pass ? "pass" : "fail";
        metrics["dwell_max_distance"] = dwell.max_distance;
        if (!dwell.pass) metrics["dwell_exit_time"] = dwell.exit_time;
    }

    run.write("validate.json", metrics.dump(2) + "\n");
    finish_run(run, "validate", cfg, metrics, t0_);
    if (!drift.pass) {
        std::cerr << "validate: drift condition violated by " << drift.max_violation << "\n";
        return 1;
    }
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const double h = cfg.solver_h();
    SolverConfig scfg{h, cfg.solver.T, cfg.seed};
    scfg.validate();
    const auto steps = static_cast<std::size_t>(std::llround(scfg.T / h));
    const SimulatedForcing forcing = build_forcing(cfg, model, h, steps);

    Trajectory traj = integrate(
        point(cfg.experiment.from), model,
        [&](std::size_t k, double) { return forcing.increments[k]; }, scfg);
    if (cfg.build_noise().kind != NoiseSpec::Kind::none) traj.seed = cfg.seed;

    run.write("trajectory.csv", csv::trajectory_csv(traj));
    std::vector<double> times(forcing.series.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i) * h;
    run.write("forcing.csv", csv::series_csv("value", times, forcing.series));

    json metrics;
    metrics["endpoint"] = state_json(traj.back());
    metrics["max_abs_z"] = traj.max_abs_z();
    metrics["steps"] = steps;
    finish_run(run, "simulate", cfg, metrics, t0_);
    return 0;
}

json segment_json(const ControlSegment& seg) {
    json j;
    j["case"] = to_string(seg.tag);
    j["duration"] = seg.duration;
    j["start"] = state_json(seg.start);
    j["end"] = state_json(seg.end);
    switch (seg.profile) {
        case ControlSegment::Profile::poly:
            j["profile"] = "poly";
            j["coefficients"] = seg.c;
            break;
        case ControlSegment::Profile::power_law:
            j["profile"] = "power_law";
            j["beta"] = seg.beta;
            j["scale"] = seg.scale;
            break;
        case ControlSegment::Profile::constant_control:
            j["profile"] = "constant";
            j["level"] = seg.level;
            break;
    }
    switch (seg.zrule) {
        case ControlSegment::ZRule::interior: j["phase"] = "interior"; break;
        case ControlSegment::ZRule::plastic_upper: j["phase"] = "plastic_upper"; break;
        case ControlSegment::ZRule::plastic_lower: j["phase"] = "plastic_lower"; break;
    }
    return j;
}

int cmd_control(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const State x0 = point(cfg.experiment.from);
    const State xT = point(cfg.experiment.to);
    const double T = cfg.solver.T;
    const double h = cfg.solver_h();

    const ControlSchedule sched = synthesize_exact_control(x0, xT, T, model);
    SolverConfig scfg{h, T, cfg.seed};
    const ControlVerification verify = verify_control(x0, sched, xT, model, scfg);

    json meta;
    meta["total_time"] = sched.total_time;
    meta["mirrored"] = xT.y > 0.0;
    for (const auto& seg : sched.segments) meta["segments"].push_back(segment_json(seg));
    run.write("schedule.json", meta.dump(2) + "\n");

    const auto steps = static_cast<std::size_t>(std::llround(T / h));
    std::vector<double> times(steps + 1), u(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        times[k] = std::min(static_cast<double>(k) * h, T);
        u[k] = sched.u(times[k], model);
    }
    run.write("control.csv", csv::series_csv("u", times, u));

    const Trajectory traj = integrate(
        x0, model, [&](std::size_t k, double t_left) { (void)k; return h * sched.u(t_left, model); },
        scfg);
    run.write("trajectory.csv", csv::trajectory_csv(traj));

    json metrics;
    metrics["endpoint"] = state_json(verify.endpoint);
    metrics["endpoint_error"] = verify.endpoint_error;
    metrics["max_constraint_violation"] = verify.max_constraint_violation;
    metrics["max_junction_residual"] = verify.max_junction_residual;
    metrics["segments"] = sched.segments.size();
    finish_run(run, "control", cfg, metrics, t0_);
    return 0;
}

int cmd_lincontrol(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const double h = cfg.solver_h();
    SolverConfig scfg{h, model.t0, cfg.seed};
    const Trajectory reference = integrate_unforced(model.p, model, scfg);
    const LinearizedSystem sys = linearize(model, reference);

    const double Y1 = cfg.experiment.target[0];
    const double Z1 = cfg.experiment.target[1];
    const ForcingPath V = linear_control(sys, Y1, Z1);
    const auto [Y, Z] = simulate_linear(sys, V);

    std::vector<double> times(sys.a.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i) * h;
    csv::Writer coeffs({"t", "a", "b"});
    for (std::size_t i = 0; i < times.size(); ++i) coeffs.row({times[i], sys.a[i], sys.b[i]});
    run.write("lin_coeffs.csv", coeffs.str());
    run.write("lin_control.csv", csv::series_csv("u", times, V.values));

    json metrics;
    metrics["target"] = {Y1, Z1};
    metrics["endpoint"] = {Y, Z};
    metrics["endpoint_error"] = std::hypot(Y - Y1, Z - Z1);
    finish_run(run, "lincontrol", cfg, metrics, t0_);
    return 0;
}

int cmd_lyapunov(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    std::vector<State> grid;
    if (!cfg.experiment.starts.empty()) {
        for (const auto& s : cfg.experiment.starts) grid.push_back(State{s[0], s[1]});
    } else {
        for (double y : {-2.0, 0.0, 2.0})
            for (double z : {-0.5, 0.0, 0.5}) grid.push_back(State{y, z});
    }
    const auto rep = lyapunov_drift_check(model, cfg.build_noise(), grid,
                                          static_cast<int>(cfg.experiment.N), cfg.solver_h(),
                                          cfg.seed);

    csv::Writer pts({"y0", "z0", "mean_y1_sq", "se", "bound"});
    for (const auto& p : rep.points)
        pts.row({p.x0.y, p.x0.z, p.mean_y2, p.se, p.bound});
    run.write("points.csv", pts.str());

    json metrics;
    metrics["pass"] = rep.pass;
    metrics["q_hat"] = rep.q_hat;
    metrics["a_hat"] = rep.a_hat;
    metrics["q_theory"] = rep.q_theory;
    metrics["a_theory"] = rep.a_theory;
    run.write("lyapunov.json", metrics.dump(2) + "\n");
    finish_run(run, "lyapunov", cfg, metrics, t0_);
    return rep.pass ? 0 : 1;
}

void write_survival_csv(RunDir& run, const std::vector<double>& survival) {
    csv::Writer w({"k", "survival"});
    for (std::size_t k = 0; k < survival.size(); ++k)
        w.row({static_cast<double>(k), survival[k]});
    run.write("survival.csv", w.str());
}

int cmd_recur(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const auto stats = hitting_time(model, cfg.build_noise(), point(cfg.experiment.from), model.p,
                                    cfg.experiment.delta, cfg.experiment.K,
                                    static_cast<int>(cfg.experiment.N), cfg.solver_h(), cfg.seed);
    write_survival_csv(run, stats.survival);

    json metrics;
    metrics["fit"] = tail_fit_json(stats.fit);
    metrics["kappa_hat"] = stats.kappa_hat;
    metrics["censored"] = stats.censored;
    metrics["horizon"] = stats.horizon;
    run.write("recur.json", metrics.dump(2) + "\n");
    finish_run(run, "recur", cfg, metrics, t0_);
    return 0;
}

int cmd_kernel_tv(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const double tv = estimate_kernel_tv(model, cfg.build_noise(), point(cfg.experiment.x),
                                         point(cfg.experiment.x_prime),
                                         static_cast<int>(cfg.experiment.N), measure_bins(cfg),
                                         cfg.solver_h(), cfg.seed);
    json metrics;
    metrics["x"] = state_json(point(cfg.experiment.x));
    metrics["x_prime"] = state_json(point(cfg.experiment.x_prime));
    metrics["tv"] = tv;
    run.write("kernel_tv.json", metrics.dump(2) + "\n");
    finish_run(run, "kernel-tv", cfg, metrics, t0_);
    return 0;
}

int cmd_couple(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const auto rep = run_coupled_chains(point(cfg.experiment.x), point(cfg.experiment.x_prime),
                                        model, cfg.build_noise(), model.p, coupling_config(cfg),
                                        cfg.experiment.K, static_cast<int>(cfg.experiment.N),
                                        cfg.solver_h(), cfg.seed);
    write_survival_csv(run, rep.survival);

    json metrics;
    metrics["fit"] = tail_fit_json(rep.fit);
    metrics["gamma_hat"] = rep.gamma_hat;
    metrics["censored"] = rep.censored;
    metrics["v_sum"] = rep.v_sum;
    run.write("couple.json", metrics.dump(2) + "\n");
    finish_run(run, "couple", cfg, metrics, t0_);
    return 0;
}

int cmd_mix(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    MixingConfig mix;
    mix.bins = measure_bins(cfg);
    mix.mu_burn = cfg.experiment.mu_burn;
    mix.mu_samples = cfg.experiment.mu_samples;
    mix.mu_thinning = cfg.experiment.thinning;
    mix.intra_step = cfg.experiment.intra_step;

    const auto rep = estimate_mixing_rate(model, cfg.build_noise(), start_distribution(cfg),
                                          cfg.experiment.K, static_cast<int>(cfg.experiment.N),
                                          mix, cfg.solver_h(), cfg.seed);

    csv::Writer w({"k", "tv"});
    w.row({0.0, rep.tv0});
    for (std::size_t k = 0; k < rep.tv.size(); ++k)
        w.row({static_cast<double>(k + 1), rep.tv[k]});
    run.write("tv.csv", w.str());
    if (!rep.intra_tv.empty()) {
        csv::Writer wi({"t", "tv"});
        for (const auto& [t, tv] : rep.intra_tv) wi.row({t, tv});
        run.write("tv_intra.csv", wi.str());
    }

    json metrics;
    metrics["fit"] = tail_fit_json(rep.fit);
    metrics["gamma_hat"] = rep.gamma_hat;
    metrics["c_hat"] = rep.c_hat;
    metrics["floor_hat"] = rep.floor_hat;
    metrics["at_floor"] = rep.at_floor;
    metrics["v_lambda"] = rep.v_lambda;
    run.write("mix.json", metrics.dump(2) + "\n");
    finish_run(run, "mix", cfg, metrics, t0_);
    return 0;
}

int cmd_invariant(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const auto mu = empirical_invariant(model, cfg.build_noise(), cfg.experiment.burn_in,
                                        cfg.experiment.N, cfg.experiment.thinning,
                                        measure_bins(cfg), cfg.solver_h(), cfg.seed);
    run.write("histogram.csv", mu.to_csv());

    json metrics;
    metrics["samples"] = mu.total();
    metrics["occupied_bins"] = mu.occupied_bins();
    metrics["overflow_fraction"] = mu.overflow_fraction();
    metrics["boundary_mass"] =
        static_cast<double>(mu.boundary_total()) / static_cast<double>(mu.total());
    run.write("invariant.json", metrics.dump(2) + "\n");
    finish_run(run, "invariant", cfg, metrics, t0_);
    return 0;
}

int cmd_noise_check(const ExperimentConfig& cfg, RunDir& run, Clock::time_point t0_) {
    const DriftModel model = cfg.build_model();
    const double t0 = model.t0;
    const int J = std::min(cfg.noise.J, 64);

    // orthonormality of the basis under trapezoidal quadrature
    const double hq = 1e-4 * t0;
    const auto n = static_cast<std::size_t>(std::llround(t0 / hq));
    std::vector<std::vector<double>> phi(J, std::vector<double>(n + 1));
    for (int j = 0; j < J; ++j)
        for (std::size_t k = 0; k <= n; ++k)
            phi[j][k] = basis_eval(j + 1, std::min(k * hq, t0), t0).phi;
    double gram_residual = 0.0;
    for (int a = 0; a < J; ++a) {
        for (int b = a; b < J; ++b) {
            double acc = 0.5 * (phi[a][0] * phi[b][0] + phi[a][n] * phi[b][n]);
            for (std::size_t k = 1; k < n; ++k) acc += phi[a][k] * phi[b][k];
            acc *= hq;
            gram_residual = std::max(gram_residual, std::abs(acc - (a == b ? 1.0 : 0.0)));
        }
    }

    // Brownian endpoint moments and covariance at (t0/4, 3 t0/4)
    const auto N = static_cast<std::size_t>(cfg.experiment.N);
    const double hb = t0 / 400.0;
    std::vector<double> endv(N), prod(N);
    parallel_for(N, [&](std::size_t i) {
        Rng rng(cfg.seed, i);
        const auto path = sample_brownian(t0, hb, rng);
        endv[i] = path.values.back();
        prod[i] = path.values[100] * path.values[300];
    });
    double mean = 0, var = 0, cov = 0;
    for (double v : endv) mean += v;
    mean /= static_cast<double>(N);
    for (double v : endv) var += (v - mean) * (v - mean);
    var /= static_cast<double>(N - 1);
    for (double v : prod) cov += v;
    cov /= static_cast<double>(N);

    // projection error decay across J in {4, 16, 64}
    const int paths = 100;
    const double hp = 1e-3 * t0;
    std::vector<int> levels = {4, 16, 64};
    std::vector<std::vector<double>> sups(levels.size(), std::vector<double>(paths));
    parallel_for(paths, [&](std::size_t i) {
        Rng rng(cfg.seed + 1, i);
        const auto path = sample_brownian(t0, hp, rng);
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const auto rec = project_path(path, BasisSpec{t0, levels[li]});
            double sup = 0.0;
            for (std::size_t k = 0; k < path.values.size(); ++k)
                sup = std::max(sup, std::abs(rec.values[k] - path.values[k]));
            sups[li][i] = sup;
        }
    });
    json proj;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        double m = 0;
        for (double v : sups[li]) m += v;
        proj[std::to_string(levels[li])] = m / paths;
    }

    json metrics;
    metrics["gram_residual"] = gram_residual;
    metrics["endpoint_mean"] = mean;
    metrics["endpoint_var"] = var;
    metrics["covariance_quarter_three_quarter"] = cov;
    metrics["covariance_expected"] = 0.25 * t0;
    metrics["projection_sup_error"] = proj;
    run.write("noise_check.json", metrics.dump(2) + "\n");
    finish_run(run, "noise-check", cfg, metrics, t0_);
    return 0;
}

double parse_component(const std::string& text, const std::string& flag, int idx) {
    std::size_t comma = text.find(',');
    if (comma == std::string::npos)
        throw ValidationError(flag + ": expected 'y,z'");
    const std::string part = idx == 0 ? text.substr(0, comma) : text.substr(comma + 1);
    try {
        std::size_t used = 0;
        const double v = std::stod(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(flag + ": cannot parse '" + part + "' as a number");
    }
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"elastoplast: constrained random dynamics laboratory"};
    app.set_help_flag("--help", "print help");  // keep --h free for the step size
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "run directory (default runs/<subcommand>)");
    auto* seed_opt = app.add_option("--seed", seed_override, "override the config seed");

    struct Overrides {
        std::optional<double> T, h, delta, delta_hat, r0, aux_h;
        std::optional<long> N, K, J, burn_in, mu_samples;
        std::optional<std::string> from, to, x, xp, target, drift, noise_kind;
        bool intra = false;
    } ov;

    auto add_common = [&](CLI::App* sub) {
        sub->set_help_flag("--help", "print help");
        sub->add_option("--T", ov.T, "horizon");
        sub->add_option("--h", ov.h, "time step");
        sub->add_option("--N", ov.N, "ensemble size / sample count");
        sub->add_option("--K", ov.K, "step horizon");
        sub->add_option("--from", ov.from, "start state 'y,z'");
        sub->add_option("--to", ov.to, "target state 'y,z'");
        sub->add_option("--x", ov.x, "first state 'y,z'");
        sub->add_option("--xp", ov.xp, "second state 'y,z'");
        sub->add_option("--target", ov.target, "linear target 'Y,Z'");
        sub->add_option("--delta", ov.delta, "hitting ball radius");
        sub->add_option("--delta-hat", ov.delta_hat, "coupling trigger radius");
        sub->add_option("--r0", ov.r0, "dwell-check start radius");
        sub->add_option("--aux-h", ov.aux_h, "coupling auxiliary substep");
        sub->add_option("--J", ov.J, "basis truncation level");
        sub->add_option("--burn-in", ov.burn_in, "burn-in steps");
        sub->add_option("--mu-samples", ov.mu_samples, "invariant-run sample count");
        sub->add_option("--drift", ov.drift, "drift name from the registry");
        sub->add_option("--noise", ov.noise_kind, "noise kind: white|decomposable|none");
        sub->add_flag("--intra-step", ov.intra, "probe TV at intra-step times");
    };

    const std::vector<std::string> names = {"simulate", "control", "lincontrol", "lyapunov",
                                            "recur", "kernel-tv", "couple", "mix", "invariant",
                                            "noise-check", "validate"};
    for (const auto& n : names) add_common(app.add_subcommand(n));

    std::vector<const char*> argv;
    argv.push_back("elastoplast");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            (void)app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 1;
    }

    const auto t_begin = std::chrono::steady_clock::now();
    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed_opt->count() > 0) cfg.seed = seed_override;

        auto& e = cfg.experiment;
        if (ov.T) cfg.solver.T = *ov.T;
        if (ov.h) cfg.solver.h = *ov.h;
        if (ov.N) e.N = *ov.N;
        if (ov.K) e.K = static_cast<int>(*ov.K);
        if (ov.delta) e.delta = *ov.delta;
        if (ov.delta_hat) e.delta_hat = *ov.delta_hat;
        if (ov.r0) e.r0 = *ov.r0;
        if (ov.aux_h) e.aux_h = *ov.aux_h;
        if (ov.J) cfg.noise.J = static_cast<int>(*ov.J);
        if (ov.burn_in) e.burn_in = *ov.burn_in;
        if (ov.mu_samples) e.mu_samples = *ov.mu_samples;
        if (ov.drift) cfg.model.drift = *ov.drift;
        if (ov.noise_kind) cfg.noise.kind = *ov.noise_kind;
        if (ov.intra) e.intra_step = true;
        auto set_point = [&](const std::optional<std::string>& text, std::array<double, 2>& dst,
                             const char* flag) {
            if (text) dst = {parse_component(*text, flag, 0), parse_component(*text, flag, 1)};
        };
        set_point(ov.from, e.from, "--from");
        set_point(ov.to, e.to, "--to");
        set_point(ov.x, e.x, "--x");
        set_point(ov.xp, e.x_prime, "--xp");
        set_point(ov.target, e.target, "--target");
        cfg.validate();

        const std::string sub = app.get_subcommands().front()->get_name();
        RunDir run;
        run.dir = out_dir.empty() ? fs::path("runs") / sub : fs::path(out_dir);

        if (sub == "validate") return cmd_validate(cfg, run, t_begin);
        if (sub == "simulate") return cmd_simulate(cfg, run, t_begin);
        if (sub == "control") return cmd_control(cfg, run, t_begin);
        if (sub == "lincontrol") return cmd_lincontrol(cfg, run, t_begin);
        if (sub == "lyapunov") return cmd_lyapunov(cfg, run, t_begin);
        if (sub == "recur") return cmd_recur(cfg, run, t_begin);
        if (sub == "kernel-tv") return cmd_kernel_tv(cfg, run, t_begin);
        if (sub == "couple") return cmd_couple(cfg, run, t_begin);
        if (sub == "mix") return cmd_mix(cfg, run, t_begin);
        if (sub == "invariant") return cmd_invariant(cfg, run, t_begin);
        if (sub == "noise-check") return cmd_noise_check(cfg, run, t_begin);
        std::cerr << "unknown subcommand: " << sub << "\n";
        return 1;
    } catch (const ValidationError& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "runtime error: " << err.what() << "\n";
        return 2;
    }
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args);
}

}  // namespace elastoplast::cli
