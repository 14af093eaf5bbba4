// Run configuration: one JSON file drives a whole experiment. Validation
// errors name the offending field; a canonical digest of the parsed config
// stamps every output for provenance.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "plattice/dynamics.hpp"

namespace plattice {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    SystemParams model;
    Forcing forcing;

    struct Noise {
        std::uint64_t seed = 12345;
        double t_min = -64.0;
        double t_max = 4.0;
        double dt = 1e-3;
        double burn_in = 20.0;
        std::string expected_digest;  // optional; mismatching noise aborts
    } noise;

    struct Experiment {
        std::vector<double> alpha_list{0.5};
        double alpha0 = 0.0;
        double tau = 0.0;
        double T = 20.0;
        int M = 64;
        int window_n = 32;  // lattice half width
        double L = 40.0;    // truncation horizon of the absorbing-radius integral
        double measure_window = 40.0;
        double ds = 0.25;
        int dict_size = 32;
        double s = 0.0, t = 1.0;
        double anchor_spacing = 0.05;
        std::vector<double> t_list{1.0};
        double sim_t_end = 4.0;
        double init_amp = 1.0;
    } experiment;

    struct Output {
        std::string dir = "out";
        std::vector<std::string> formats{"csv", "json"};
    } output;

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    std::string digest() const;
    void validate() const;  // cross-field checks; throws ConfigError
};

RunConfig load_config(const std::filesystem::path& file);

}  // namespace plattice
