#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elastoplast/noise.hpp"
#include "elastoplast/types.hpp"

namespace elastoplast {

/// Drift registry: named drifts with their dissipation certificates.
///   linear          f = -y                  (alpha = 1,   C = 0)
///   linear-coupled  f = -y + c z            (alpha = 1/2, C = c^2/2)
///   cubic-sat       f = -y^3 / (1 + y^2)    (alpha = 1,   C = 1)
/// User drifts are registered through register_drift, not parsed from text.
using DriftFactory = DriftModel (*)(const std::map<std::string, double>& params);

void register_drift(const std::string& name, DriftFactory factory);
[[nodiscard]] std::vector<std::string> registered_drifts();
[[nodiscard]] DriftModel make_drift(const std::string& name,
                                    const std::map<std::string, double>& params);

struct ModelConfig {
    std::string drift = "linear";
    std::map<std::string, double> params;
    std::optional<double> alpha;
    std::optional<double> c_lyap;
    std::optional<std::array<double, 2>> p;
    std::optional<double> smooth_radius;
    std::optional<double> t0;
};

struct NoiseConfig {
    std::string kind = "white";  // white | decomposable | none
    std::vector<double> b;
    std::string rho = "normal";
    int J = 64;
};

struct SolverBlock {
    std::optional<double> h;  // default: 1e-3 * t0
    double T = 1.0;
};

/// Subcommand knobs; a command reads only the keys it documents.
struct ExperimentBlock {
    long N = 10000;
    int K = 50;
    double delta = 0.5;
    double delta_hat = 0.25;
    double ymax = 10.0;
    int bins_y = 200;
    int bins_z = 100;
    long burn_in = 1000;
    int thinning = 1;
    long mu_burn = 1000;
    long mu_samples = 200000;
    int aux_samples = 4096;
    double aux_h = 0.0;
    double coupling_ymax = 4.0;
    int coupling_bins_y = 16;
    int coupling_bins_z = 8;
    std::array<double, 2> from{0.5, 0.0};
    std::array<double, 2> to{-1.0, 0.0};
    std::array<double, 2> x{0.0, 0.0};
    std::array<double, 2> x_prime{0.1, 0.0};
    std::array<double, 2> target{1.0, 1.0};
    double r0 = 0.1;
    double level = 1.0;
    double epsilon = 0.01;
    bool intra_step = false;
    std::vector<std::array<double, 3>> starts;  // (y, z, weight); empty = delta at `from`
};

struct ExperimentConfig {
    ModelConfig model;
    NoiseConfig noise;
    SolverBlock solver;
    ExperimentBlock experiment;
    std::uint64_t seed = 1;

    [[nodiscard]] DriftModel build_model() const;
    [[nodiscard]] NoiseSpec build_noise() const;
    [[nodiscard]] double solver_h() const;

    /// Canonical serialization: every field present, keys sorted. Loading the
    /// result reproduces the config exactly.
    [[nodiscard]] std::string canonical_json() const;
    /// FNV-1a over the canonical serialization.
    [[nodiscard]] std::uint64_t config_hash() const;

    void validate() const;
};

/// Parses and validates a config; unknown keys are rejected with their path,
/// range violations name the offending key.
[[nodiscard]] ExperimentConfig parse_config(const std::string& json_text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace elastoplast
