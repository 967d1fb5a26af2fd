#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "degchemo/config.hpp"
#include "json.hpp"

namespace degchemo {

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string tolerance;  // the config key the threshold came from
    std::string detail;
};

/// Columns of a gnuplot-readable series, written to <name>.dat.
struct DatSeries {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string study;
    nlohmann::json runs = nlohmann::json::array();  // flat records, one CSV row each
    nlohmann::json aggregate = nlohmann::json::object();
    std::vector<Verdict> verdicts;
    std::vector<std::string> notes;
    std::vector<DatSeries> series;

    bool pass() const;
    const Verdict* find(const std::string& name) const;
};

struct RunOptions {
    int threads = 1;
};

ExperimentReport run_dissipative(const ExperimentConfig& c, const RunOptions& opt = {});
ExperimentReport run_pair_stability(const ExperimentConfig& c, const RunOptions& opt = {});
ExperimentReport run_smoothing(const ExperimentConfig& c, const RunOptions& opt = {});
ExperimentReport run_regularization(const ExperimentConfig& c, const RunOptions& opt = {});
ExperimentReport run_propagation(const ExperimentConfig& c, const RunOptions& opt = {});
ExperimentReport run_dimension(const ExperimentConfig& c, const RunOptions& opt = {});

const std::vector<std::string>& study_names();
/// Dispatch by name; unknown names raise ConfigError.
ExperimentReport run_study(const std::string& name, const ExperimentConfig& c, const RunOptions& opt = {});

/// report.json content. `timestamp` is stored as given and left out of content_hash.
nlohmann::json report_json(const ExperimentReport& r, const ExperimentConfig& c, const std::string& timestamp);

/// Writes <outdir>/<study>/{report.json, runs.csv, *.dat}; returns the study directory.
std::filesystem::path write_report(const std::filesystem::path& outdir, const ExperimentReport& r,
                                   const ExperimentConfig& c);

/// |M|_inf + max(|rho|_inf, |grad rho|_inf).
double dissipative_norm(const State& s);

/// coarse_features() of every snapshot at or after t_from.
std::vector<std::vector<double>> feature_cloud(const Trajectory& traj, double t_from);

}  // namespace degchemo
