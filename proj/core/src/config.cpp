#include "elastoplast/config.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace elastoplast {

using nlohmann::json;

namespace {

DriftModel drift_linear(const std::map<std::string, double>&) {
    DriftModel m;
    m.name = "linear";
    m.f = [](double y, double) { return -y; };
    m.fy = [](double, double) { return -1.0; };
    m.fz = [](double, double) { return 0.0; };
    m.alpha = 1.0;
    m.c_lyap = 0.0;
    return m;
}

DriftModel drift_linear_coupled(const std::map<std::string, double>& params) {
    double c = 1.0;
    if (auto it = params.find("c"); it != params.end()) c = it->second;
    DriftModel m;
    m.name = "linear-coupled";
    m.f = [c](double y, double z) { return -y + c * z; };
    m.fy = [](double, double) { return -1.0; };
    m.fz = [c](double, double) { return c; };
    m.alpha = 0.5;
    m.c_lyap = 0.5 * c * c;
    return m;
}

DriftModel drift_cubic_sat(const std::map<std::string, double>&) {
    DriftModel m;
    m.name = "cubic-sat";
    // y f = -y^4/(1+y^2) = -(y^2 - y^2/(1+y^2)) <= -y^2 + 1
    m.f = [](double y, double) { return -y * y * y / (1.0 + y * y); };
    m.fy = [](double y, double) {
        const double d = 1.0 + y * y;
        return -(3.0 * y * y * d - 2.0 * y * y * y * y) / (d * d);
    };
    m.fz = [](double, double) { return 0.0; };
    m.alpha = 1.0;
    m.c_lyap = 1.0;
    return m;
}

std::map<std::string, DriftFactory>& registry() {
    static std::map<std::string, DriftFactory> reg = {
        {"linear", &drift_linear},
        {"linear-coupled", &drift_linear_coupled},
        {"cubic-sat", &drift_cubic_sat},
    };
    return reg;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config: " + path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) fail(path + "." + key, "unknown key");
    }
}

double require_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::array<double, 2> parse_point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [y, z]");
    return {require_number(v[0], path + "[0]"), require_number(v[1], path + "[1]")};
}

}  // namespace

void register_drift(const std::string& name, DriftFactory factory) {
    std::lock_guard lock(registry_mutex());
    registry()[name] = factory;
}

std::vector<std::string> registered_drifts() {
    std::lock_guard lock(registry_mutex());
    std::vector<std::string> names;
    for (const auto& [k, _] : registry()) names.push_back(k);
    return names;
}

DriftModel make_drift(const std::string& name, const std::map<std::string, double>& params) {
    DriftFactory factory = nullptr;
    {
        std::lock_guard lock(registry_mutex());
        auto it = registry().find(name);
        if (it != registry().end()) factory = it->second;
    }
    if (!factory)
        throw ValidationError("config: model.drift: unknown drift '" + name + "'");
    return factory(params);
}

DriftModel ExperimentConfig::build_model() const {
    DriftModel m = make_drift(model.drift, model.params);
    if (model.alpha) m.alpha = *model.alpha;
    if (model.c_lyap) m.c_lyap = *model.c_lyap;
    if (model.p) m.p = State{(*model.p)[0], (*model.p)[1]};
    if (model.smooth_radius) m.smooth_radius = *model.smooth_radius;
    if (model.t0) m.t0 = *model.t0;
    m.validate();
    return m;
}

NoiseSpec ExperimentConfig::build_noise() const {
    if (noise.kind == "none") return NoiseSpec::none();
    if (noise.kind == "white") return NoiseSpec::white();
    if (noise.kind == "decomposable") {
        DecomposableLaw law;
        law.b = noise.b;
        law.J = noise.J;
        law.rho = RhoSpec::parse(noise.rho);
        law.validate();
        return NoiseSpec::decomposable(law);
    }
    throw ValidationError("config: noise.kind: expected white, decomposable or none");
}

double ExperimentConfig::solver_h() const {
    const double t0 = model.t0.value_or(1.0);
    return solver.h.value_or(1e-3 * t0);
}

void ExperimentConfig::validate() const {
    (void)build_model();
    (void)build_noise();
    if (solver.h && !(*solver.h > 0.0)) fail("solver.h", "must be > 0");
    if (!(solver.T > 0.0)) fail("solver.T", "must be > 0");
    const auto& e = experiment;
    if (e.N < 1) fail("experiment.N", "must be >= 1");
    if (e.K < 1) fail("experiment.K", "must be >= 1");
    if (!(e.delta > 0.0)) fail("experiment.delta", "must be > 0");
    if (!(e.delta_hat > 0.0)) fail("experiment.delta_hat", "must be > 0");
    if (!(e.ymax > 0.0)) fail("experiment.ymax", "must be > 0");
    if (e.bins_y < 1 || e.bins_z < 1) fail("experiment.bins_y/bins_z", "must be >= 1");
    if (e.burn_in < 1) fail("experiment.burn_in", "must be >= 1");
    if (e.thinning < 1) fail("experiment.thinning", "must be >= 1");
    if (e.aux_samples < 2) fail("experiment.aux_samples", "must be >= 2");
    if (e.aux_h < 0.0) fail("experiment.aux_h", "must be >= 0");
    if (e.r0 < 0.0) fail("experiment.r0", "must be >= 0");
    for (const auto& s : e.starts)
        if (s[2] < 0.0) fail("experiment.starts", "weights must be >= 0");
}

namespace {

json to_json(const ExperimentConfig& c) {
    json j;
    j["model"]["drift"] = c.model.drift;
    j["model"]["params"] = c.model.params;
    if (c.model.alpha) j["model"]["alpha"] = *c.model.alpha;
    if (c.model.c_lyap) j["model"]["c_lyap"] = *c.model.c_lyap;
    if (c.model.p) j["model"]["p"] = *c.model.p;
    if (c.model.smooth_radius) j["model"]["smooth_radius"] = *c.model.smooth_radius;
    if (c.model.t0) j["model"]["t0"] = *c.model.t0;
    j["noise"]["kind"] = c.noise.kind;
    j["noise"]["b"] = c.noise.b;
    j["noise"]["rho"] = c.noise.rho;
    j["noise"]["J"] = c.noise.J;
    if (c.solver.h) j["solver"]["h"] = *c.solver.h;
    j["solver"]["T"] = c.solver.T;
    const auto& e = c.experiment;
    json& je = j["experiment"];
    je["N"] = e.N;
    je["K"] = e.K;
    je["delta"] = e.delta;
    je["delta_hat"] = e.delta_hat;
    je["ymax"] = e.ymax;
    je["bins_y"] = e.bins_y;
    je["bins_z"] = e.bins_z;
    je["burn_in"] = e.burn_in;
    je["thinning"] = e.thinning;
    je["mu_burn"] = e.mu_burn;
    je["mu_samples"] = e.mu_samples;
    je["aux_samples"] = e.aux_samples;
    je["aux_h"] = e.aux_h;
    je["coupling_ymax"] = e.coupling_ymax;
    je["coupling_bins_y"] = e.coupling_bins_y;
    je["coupling_bins_z"] = e.coupling_bins_z;
    je["from"] = e.from;
    je["to"] = e.to;
    je["x"] = e.x;
    je["x_prime"] = e.x_prime;
    je["target"] = e.target;
    je["r0"] = e.r0;
    je["level"] = e.level;
    je["epsilon"] = e.epsilon;
    je["intra_step"] = e.intra_step;
    je["starts"] = e.starts;
    j["seed"] = c.seed;
    return j;
}

}  // namespace

std::string ExperimentConfig::canonical_json() const { return to_json(*this).dump(2) + "\n"; }

std::uint64_t ExperimentConfig::config_hash() const {
    const std::string text = canonical_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ValidationError(std::string("config: parse error: ") + err.what());
    }
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    expect_keys(j, "config", {"model", "noise", "solver", "experiment", "seed"});

    ExperimentConfig c;
    if (j.contains("model")) {
        const json& m = j["model"];
        expect_keys(m, "model", {"drift", "params", "alpha", "c_lyap", "p", "smooth_radius", "t0"});
        if (m.contains("drift")) {
            if (!m["drift"].is_string()) fail("model.drift", "expected a string");
            c.model.drift = m["drift"].get<std::string>();
        }
        if (m.contains("params")) {
            if (!m["params"].is_object()) fail("model.params", "expected an object");
            for (const auto& [k, v] : m["params"].items())
                c.model.params[k] = require_number(v, "model.params." + k);
        }
        if (m.contains("alpha")) {
            c.model.alpha = require_number(m["alpha"], "model.alpha");
            if (!(*c.model.alpha > 0.0)) fail("model.alpha", "must be > 0");
        }
        if (m.contains("c_lyap")) {
            c.model.c_lyap = require_number(m["c_lyap"], "model.c_lyap");
            if (*c.model.c_lyap < 0.0) fail("model.c_lyap", "must be >= 0");
        }
        if (m.contains("p")) c.model.p = parse_point(m["p"], "model.p");
        if (m.contains("smooth_radius")) {
            c.model.smooth_radius = require_number(m["smooth_radius"], "model.smooth_radius");
            if (!(*c.model.smooth_radius > 0.0)) fail("model.smooth_radius", "must be > 0");
        }
        if (m.contains("t0")) {
            c.model.t0 = require_number(m["t0"], "model.t0");
            if (!(*c.model.t0 > 0.0 && *c.model.t0 <= 1.0)) fail("model.t0", "must lie in (0, 1]");
        }
    }
    if (j.contains("noise")) {
        const json& n = j["noise"];
        expect_keys(n, "noise", {"kind", "b", "rho", "J"});
        if (n.contains("kind")) {
            if (!n["kind"].is_string()) fail("noise.kind", "expected a string");
            c.noise.kind = n["kind"].get<std::string>();
        }
        if (n.contains("b")) {
            if (!n["b"].is_array()) fail("noise.b", "expected an array of numbers");
            for (std::size_t i = 0; i < n["b"].size(); ++i)
                c.noise.b.push_back(require_number(n["b"][i], "noise.b[" + std::to_string(i) + "]"));
        }
        if (n.contains("rho")) {
            if (!n["rho"].is_string()) fail("noise.rho", "expected a string");
            c.noise.rho = n["rho"].get<std::string>();
        }
        if (n.contains("J")) {
            if (!n["J"].is_number_integer()) fail("noise.J", "expected an integer");
            c.noise.J = n["J"].get<int>();
            if (c.noise.J < 1) fail("noise.J", "must be >= 1");
        }
    }
    if (c.noise.kind == "decomposable" && c.noise.b.empty()) {
        // default truncated geometric weights at level J
        c.noise.b.resize(c.noise.J);
        for (int i = 0; i < c.noise.J; ++i) c.noise.b[i] = std::pow(2.0, -i);
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        expect_keys(s, "solver", {"h", "T"});
        if (s.contains("h")) c.solver.h = require_number(s["h"], "solver.h");
        if (s.contains("T")) c.solver.T = require_number(s["T"], "solver.T");
    }
    if (j.contains("experiment")) {
        const json& e = j["experiment"];
        expect_keys(e, "experiment",
                    {"N", "K", "delta", "delta_hat", "ymax", "bins_y", "bins_z", "burn_in",
                     "thinning", "mu_burn", "mu_samples", "aux_samples", "aux_h", "coupling_ymax",
                     "coupling_bins_y", "coupling_bins_z", "from", "to", "x", "x_prime", "target",
                     "r0", "level", "epsilon", "intra_step", "starts"});
        auto num = [&](const char* key, auto& dst) {
            if (e.contains(key)) dst = require_number(e[key], std::string("experiment.") + key);
        };
        auto integer = [&](const char* key, auto& dst) {
            if (e.contains(key)) {
                if (!e[key].is_number_integer())
                    fail(std::string("experiment.") + key, "expected an integer");
                dst = e[key].get<long>();
            }
        };
        integer("N", c.experiment.N);
        long k_tmp = c.experiment.K;
        integer("K", k_tmp);
        c.experiment.K = static_cast<int>(k_tmp);
        num("delta", c.experiment.delta);
        num("delta_hat", c.experiment.delta_hat);
        num("ymax", c.experiment.ymax);
        long tmp;
        tmp = c.experiment.bins_y; integer("bins_y", tmp); c.experiment.bins_y = static_cast<int>(tmp);
        tmp = c.experiment.bins_z; integer("bins_z", tmp); c.experiment.bins_z = static_cast<int>(tmp);
        integer("burn_in", c.experiment.burn_in);
        tmp = c.experiment.thinning; integer("thinning", tmp); c.experiment.thinning = static_cast<int>(tmp);
        integer("mu_burn", c.experiment.mu_burn);
        integer("mu_samples", c.experiment.mu_samples);
        tmp = c.experiment.aux_samples; integer("aux_samples", tmp); c.experiment.aux_samples = static_cast<int>(tmp);
        num("aux_h", c.experiment.aux_h);
        num("coupling_ymax", c.experiment.coupling_ymax);
        tmp = c.experiment.coupling_bins_y; integer("coupling_bins_y", tmp); c.experiment.coupling_bins_y = static_cast<int>(tmp);
        tmp = c.experiment.coupling_bins_z; integer("coupling_bins_z", tmp); c.experiment.coupling_bins_z = static_cast<int>(tmp);
        if (e.contains("from")) c.experiment.from = parse_point(e["from"], "experiment.from");
        if (e.contains("to")) c.experiment.to = parse_point(e["to"], "experiment.to");
        if (e.contains("x")) c.experiment.x = parse_point(e["x"], "experiment.x");
        if (e.contains("x_prime"))
            c.experiment.x_prime = parse_point(e["x_prime"], "experiment.x_prime");
        if (e.contains("target")) c.experiment.target = parse_point(e["target"], "experiment.target");
        num("r0", c.experiment.r0);
        num("level", c.experiment.level);
        num("epsilon", c.experiment.epsilon);
        if (e.contains("intra_step")) {
            if (!e["intra_step"].is_boolean()) fail("experiment.intra_step", "expected a boolean");
            c.experiment.intra_step = e["intra_step"].get<bool>();
        }
        if (e.contains("starts")) {
            if (!e["starts"].is_array()) fail("experiment.starts", "expected an array");
            for (std::size_t i = 0; i < e["starts"].size(); ++i) {
                const json& s = e["starts"][i];
                const std::string path = "experiment.starts[" + std::to_string(i) + "]";
                if (!s.is_array() || s.size() != 3) fail(path, "expected [y, z, weight]");
                c.experiment.starts.push_back({require_number(s[0], path),
                                               require_number(s[1], path),
                                               require_number(s[2], path)});
            }
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer()) fail("seed", "expected an integer");
        if (!j["seed"].is_number_unsigned() && j["seed"].get<long long>() < 0)
            fail("seed", "must be >= 0");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace elastoplast
