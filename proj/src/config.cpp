#include "plattice/config.hpp"

#include <fstream>

#include "plattice/io.hpp"

namespace plattice {

namespace {

template <class T>
void read_field(const nlohmann::json& j, const char* section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const std::exception&) {
        throw ConfigError(std::string(section) + "." + key + ": wrong type");
    }
}

NuProfile::Kind nu_kind_of(const std::string& s) {
    if (s == "constant") return NuProfile::Kind::constant;
    if (s == "sine") return NuProfile::Kind::sine;
    if (s == "piecewise") return NuProfile::Kind::piecewise;
    throw ConfigError("model.nu.profile: unknown profile '" + s + "'");
}

std::string nu_kind_name(NuProfile::Kind k) {
    switch (k) {
        case NuProfile::Kind::constant: return "constant";
        case NuProfile::Kind::sine: return "sine";
        case NuProfile::Kind::piecewise: return "piecewise";
    }
    return "constant";
}

Forcing::Family family_of(const std::string& s) {
    if (s == "zero") return Forcing::Family::zero;
    if (s == "power_sine") return Forcing::Family::power_sine;
    throw ConfigError("model.forcing.family: unknown family '" + s + "'");
}

Forcing::GProfile gprofile_of(const std::string& s) {
    if (s == "inv_square") return Forcing::GProfile::inv_square;
    if (s == "exp") return Forcing::GProfile::exponential;
    throw ConfigError("model.forcing.g_profile: unknown profile '" + s + "'");
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        read_field(m, "model", "p", c.model.p);
        read_field(m, "model", "q", c.model.q);
        read_field(m, "model", "lambda", c.model.lambda);
        read_field(m, "model", "lambda0", c.model.lambda0);
        read_field(m, "model", "lambda1", c.model.lambda1);
        read_field(m, "model", "beta", c.model.beta);
        if (m.contains("nu")) {
            const auto& nu = m.at("nu");
            std::string prof = nu_kind_name(c.model.nu.kind);
            read_field(nu, "model.nu", "profile", prof);
            c.model.nu.kind = nu_kind_of(prof);
            read_field(nu, "model.nu", "nu0", c.model.nu.nu0);
            read_field(nu, "model.nu", "rate", c.model.nu.rate);
            read_field(nu, "model.nu", "knots", c.model.nu.knots);
            read_field(nu, "model.nu", "levels", c.model.nu.levels);
        }
        if (m.contains("forcing")) {
            const auto& f = m.at("forcing");
            std::string fam = "power_sine", gp = "inv_square";
            if (c.forcing.family == Forcing::Family::zero) fam = "zero";
            read_field(f, "model.forcing", "family", fam);
            c.forcing.family = family_of(fam);
            read_field(f, "model.forcing", "g_profile", gp);
            c.forcing.g_profile = gprofile_of(gp);
            read_field(f, "model.forcing", "g_amp", c.forcing.g_amp);
            read_field(f, "model.forcing", "g_rate", c.forcing.g_rate);
            read_field(f, "model.forcing", "g_decay", c.forcing.g_decay);
            read_field(f, "model.forcing", "kappa0", c.forcing.kappa0);
            read_field(f, "model.forcing", "Lambda", c.forcing.big_lambda);
            read_field(f, "model.forcing", "t0", c.forcing.t0);
        }
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        read_field(n, "noise", "seed", c.noise.seed);
        read_field(n, "noise", "t_min", c.noise.t_min);
        read_field(n, "noise", "t_max", c.noise.t_max);
        read_field(n, "noise", "dt", c.noise.dt);
        read_field(n, "noise", "burn_in", c.noise.burn_in);
        read_field(n, "noise", "expected_digest", c.noise.expected_digest);
    }
    if (j.contains("experiment")) {
        const auto& e = j.at("experiment");
        read_field(e, "experiment", "alpha_list", c.experiment.alpha_list);
        read_field(e, "experiment", "alpha0", c.experiment.alpha0);
        read_field(e, "experiment", "tau", c.experiment.tau);
        read_field(e, "experiment", "T", c.experiment.T);
        read_field(e, "experiment", "M", c.experiment.M);
        read_field(e, "experiment", "window_n", c.experiment.window_n);
        read_field(e, "experiment", "L", c.experiment.L);
        read_field(e, "experiment", "measure_window", c.experiment.measure_window);
        read_field(e, "experiment", "ds", c.experiment.ds);
        read_field(e, "experiment", "dict_size", c.experiment.dict_size);
        read_field(e, "experiment", "s", c.experiment.s);
        read_field(e, "experiment", "t", c.experiment.t);
        read_field(e, "experiment", "anchor_spacing", c.experiment.anchor_spacing);
        read_field(e, "experiment", "t_list", c.experiment.t_list);
        read_field(e, "experiment", "sim_t_end", c.experiment.sim_t_end);
        read_field(e, "experiment", "init_amp", c.experiment.init_amp);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        read_field(o, "output", "dir", c.output.dir);
        read_field(o, "output", "formats", c.output.formats);
    }
    c.validate();
    return c;
}

void RunConfig::validate() const {
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(noise.dt > 0.0)) throw ConfigError("noise.dt: must be > 0");
    if (!(noise.t_min < 0.0 && noise.t_max > 0.0)) throw ConfigError("noise.t_min/t_max: grid must contain 0");
    if (noise.burn_in < 0.0) throw ConfigError("noise.burn_in: must be >= 0");
    if (experiment.M < 2) throw ConfigError("experiment.M: must be >= 2");
    if (experiment.window_n < 1) throw ConfigError("experiment.window_n: must be >= 1");
    if (!(experiment.T > 0.0)) throw ConfigError("experiment.T: must be > 0");
    if (experiment.tau - experiment.T < noise.t_min)
        throw ConfigError("experiment.tau/T: pullback start tau - T lies before noise.t_min");
    if (!(experiment.ds > 0.0)) throw ConfigError("experiment.ds: must be > 0");
    const double k = experiment.ds / noise.dt;
    if (std::abs(k - std::llround(k)) > 1e-9 * std::max(1.0, k))
        throw ConfigError("experiment.ds: must be a multiple of noise.dt");
    if (!(experiment.measure_window > 0.0)) throw ConfigError("experiment.measure_window: must be > 0");
    if (experiment.dict_size < 1) throw ConfigError("experiment.dict_size: must be >= 1");
    if (!(experiment.s < experiment.t)) throw ConfigError("experiment.s/t: need s < t");
    if (!(experiment.anchor_spacing > 0.0)) throw ConfigError("experiment.anchor_spacing: must be > 0");
    if (experiment.t_list.empty()) throw ConfigError("experiment.t_list: must not be empty");
    if (output.dir.empty()) throw ConfigError("output.dir: must not be empty");
    for (const auto& f : output.formats)
        if (f != "csv" && f != "json") throw ConfigError("output.formats: unknown format '" + f + "'");
}

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["model"]["p"] = model.p;
    j["model"]["q"] = model.q;
    j["model"]["lambda"] = model.lambda;
    j["model"]["lambda0"] = model.lambda0;
    j["model"]["lambda1"] = model.lambda1;
    j["model"]["beta"] = model.beta;
    j["model"]["nu"]["profile"] = nu_kind_name(model.nu.kind);
    j["model"]["nu"]["nu0"] = model.nu.nu0;
    j["model"]["nu"]["rate"] = model.nu.rate;
    if (model.nu.kind == NuProfile::Kind::piecewise) {
        j["model"]["nu"]["knots"] = model.nu.knots;
        j["model"]["nu"]["levels"] = model.nu.levels;
    }
    j["model"]["forcing"]["family"] = forcing.family == Forcing::Family::zero ? "zero" : "power_sine";
    j["model"]["forcing"]["g_profile"] =
        forcing.g_profile == Forcing::GProfile::inv_square ? "inv_square" : "exp";
    j["model"]["forcing"]["g_amp"] = forcing.g_amp;
    j["model"]["forcing"]["g_rate"] = forcing.g_rate;
    j["model"]["forcing"]["g_decay"] = forcing.g_decay;
    j["noise"]["seed"] = noise.seed;
    j["noise"]["t_min"] = noise.t_min;
    j["noise"]["t_max"] = noise.t_max;
    j["noise"]["dt"] = noise.dt;
    j["noise"]["burn_in"] = noise.burn_in;
    j["experiment"]["alpha_list"] = experiment.alpha_list;
    j["experiment"]["alpha0"] = experiment.alpha0;
    j["experiment"]["tau"] = experiment.tau;
    j["experiment"]["T"] = experiment.T;
    j["experiment"]["M"] = experiment.M;
    j["experiment"]["window_n"] = experiment.window_n;
    j["experiment"]["L"] = experiment.L;
    j["experiment"]["measure_window"] = experiment.measure_window;
    j["experiment"]["ds"] = experiment.ds;
    j["experiment"]["dict_size"] = experiment.dict_size;
    j["experiment"]["s"] = experiment.s;
    j["experiment"]["t"] = experiment.t;
    j["experiment"]["anchor_spacing"] = experiment.anchor_spacing;
    j["experiment"]["t_list"] = experiment.t_list;
    j["experiment"]["sim_t_end"] = experiment.sim_t_end;
    j["experiment"]["init_amp"] = experiment.init_amp;
    j["output"]["dir"] = output.dir;
    j["output"]["formats"] = output.formats;
    return j;
}

std::string RunConfig::digest() const { return string_digest(to_json().dump()); }

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream f(file);
    if (!f) throw ConfigError("config: cannot open " + file.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return RunConfig::from_json(j);
}

}  // namespace plattice
