#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "degchemo/grid.hpp"
#include "degchemo/model.hpp"
#include "degchemo/solver.hpp"
#include "json.hpp"

namespace degchemo {

/// Thrown for malformed or inconsistent configuration documents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Initial-datum family sampled at cell centers.
///   zero, constant:  offset
///   bump:            offset + amplitude * max(0, 1 - |x-c|^2/radius^2)^power
///   plateau:         offset + amplitude * [|x-c| < radius]
///   sine:            offset + amplitude * prod_k sin(pi x_k / L_k)
///   random_trig:     offset + amplitude * |sum_{m<=modes} a_m prod_k sin(m pi x_k / L_k)| / sum|a_m|
struct InitialSpec {
    std::string kind = "bump";
    double offset = 0.0;
    double amplitude = 1.0;
    std::array<double, 2> center{0.5, 0.5};
    double radius = 0.2;
    double power = 1.0;
    int modes = 4;
};

struct DissipativeStudy {
    std::vector<double> amplitudes{1.0, 5.0, 25.0};
    double t_end = 10.0;
    double sample_every = 0.25;
    double norm_ratio_tol = 2.0;
    double omega_min = 0.0;
    bool counterexample = true;
    std::vector<double> counterexample_amplitudes{1e-6, 1e-5};
};

struct PairStudy {
    std::vector<double> eps{1e-2, 1e-3, 1e-4};
    std::string perturb = "M";  // "M" or "rho"
    double t_end = 5.0;
    double sample_every = 0.25;
    std::vector<double> theta_ladder{0.25, 0.5, 0.75, 1.0};
    double stability_tol = 0.2;
    double theta_growth_tol = 10.0;
};

struct SmoothingStudy {
    std::vector<double> deltas{0.1, 0.2};
    std::vector<double> T{0.5, 1.0, 2.0};
    double t1_fraction = 0.5;
    int snapshots = 20;
    double localized_eps = 1e-6;
    double localized_width = 0.05;
    int generic_pairs = 20;
    double generic_eps = 1e-2;
    double contraction_tol = 0.1;
};

struct RegularizationStudy {
    std::vector<int> ladder{10, 20, 40, 80};
    double t_end = 1.0;
};

struct PropagationStudy {
    double t_end = 1.0;
    double sample_every = 0.05;
    double tol = 1e-12;
    double growth_limit = 0.5;
    int reg_n = 100;
    bool contrast = true;
    double amplitude = 0.5;  // replaces initial.M.amplitude for this study
};

struct DimensionStudy {
    double t_end = 50.0;
    double transient = 10.0;
    double sample_every = 0.25;
    std::vector<double> radii{1e-3, 2.5e-3, 6.3e-3, 1.6e-2, 4e-2, 1e-1};
    int min_snapshots = 10;
    bool counterexample = true;
    double counterexample_t_end = 10.0;
    double counterexample_transient = 2.0;
    double counterexample_amplitude = 1e-6;
};

struct ExperimentConfig {
    ModelParams model;
    int dim = 1;
    std::array<double, 2> lengths{1.0, 1.0};
    std::array<int, 2> cells{64, 64};
    SolverConfig solver;
    InitialSpec initial_M;
    InitialSpec initial_rho{"constant", 1.0};
    std::uint64_t seed = 42;

    DissipativeStudy dissipative;
    PairStudy pair;
    SmoothingStudy smoothing;
    RegularizationStudy regularization;
    PropagationStudy propagation;
    DimensionStudy dimension;

    Grid grid() const;
};

/// Document with every key and its default value.
nlohmann::json default_config_json();

/// "a.b.c=value": value parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Merges `doc` over the defaults. Unknown keys and invalid values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Fully resolved document; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

std::uint64_t config_hash(const ExperimentConfig& c);

ScalarField make_initial(const InitialSpec& spec, const Grid& grid, double boundary, std::uint64_t seed);
State initial_state(const ExperimentConfig& c);

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
double unit_uniform(std::uint64_t bits);

}  // namespace degchemo
