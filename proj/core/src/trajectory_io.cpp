#include "degchemo/trajectory_io.hpp"

#include <cstdio>
#include <fstream>

#include "degchemo/field_io.hpp"
#include "degchemo/mask.hpp"

namespace degchemo {

namespace fs = std::filesystem;

std::string hex_hash(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string numbered(const char* stem, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04zu.fld", stem, k);
    return buf;
}

std::uint64_t parse_hex(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

void save_trajectory(const fs::path& dir, const Trajectory& traj, const nlohmann::json& config,
                     const nlohmann::json& model) {
    fs::create_directories(dir);
    nlohmann::json snaps = nlohmann::json::array();
    nlohmann::json times = nlohmann::json::array();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const State& s = traj.snapshots[k];
        save_field(dir / numbered("M", k), s.M);
        save_field(dir / numbered("rho", k), s.rho);
        snaps.push_back({{"M", hex_hash(field_hash(s.M))}, {"rho", hex_hash(field_hash(s.rho))}});
        times.push_back(s.time);
    }
    nlohmann::json manifest{
        {"config", config},
        {"model", model},
        {"times", times},
        {"steps", traj.steps},
        {"hashes",
         {{"config", hex_hash(traj.config_hash)}, {"model", hex_hash(traj.model_hash)}, {"snapshots", snaps}}},
    };
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

LoadedTrajectory load_trajectory(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw InvalidArgument("no manifest.json in " + dir.string());
    LoadedTrajectory out;
    try {
        out.manifest = nlohmann::json::parse(in);
        const auto times = out.manifest.at("times").get<std::vector<double>>();
        const auto& hashes = out.manifest.at("hashes");
        out.trajectory.config_hash = parse_hex(hashes.at("config").get<std::string>());
        out.trajectory.model_hash = parse_hex(hashes.at("model").get<std::string>());
        out.trajectory.steps = out.manifest.value("steps", 0L);
        for (std::size_t k = 0; k < times.size(); ++k) {
            State s{load_field(dir / numbered("M", k)), load_field(dir / numbered("rho", k)), times[k]};
            const auto& h = hashes.at("snapshots").at(k);
            if (hex_hash(field_hash(s.M)) != h.at("M").get<std::string>() ||
                hex_hash(field_hash(s.rho)) != h.at("rho").get<std::string>()) {
                throw InvalidArgument("snapshot " + std::to_string(k) + " does not match its manifest hash");
            }
            out.trajectory.snapshots.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad manifest: ") + e.what());
    }
    return out;
}

}  // namespace degchemo
