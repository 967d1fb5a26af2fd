#pragma once

#include <filesystem>

#include "degchemo/solver.hpp"
#include "json.hpp"

namespace degchemo {

/**
 * Directory layout:
 *   manifest.json   {config, model, times, steps, hashes:{config, model, snapshots:[{M, rho}]}}
 *   M_0000.fld, rho_0000.fld, ...  one pair per snapshot
 * Hashes are 16-digit hex FNV-1a values.
 */
void save_trajectory(const std::filesystem::path& dir, const Trajectory& traj, const nlohmann::json& config,
                     const nlohmann::json& model);

struct LoadedTrajectory {
    Trajectory trajectory;
    nlohmann::json manifest;
};

LoadedTrajectory load_trajectory(const std::filesystem::path& dir);

std::string hex_hash(std::uint64_t h);

}  // namespace degchemo
