#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "degchemo/field_io.hpp"
#include "degchemo/trajectory_io.hpp"
#include "test_util.hpp"

using namespace degchemo;
namespace fs = std::filesystem;

namespace {

Trajectory short_run() {
    const Grid g = make_grid_1d(1.0, 32);
    SolverConfig c;
    c.t_end = 0.3;
    return evolve(make_state(degchemo::testing::bump1d(32, 0.5, 0.2), ScalarField(g, 1.0, 1.0)), default_params(),
                  c);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(TrajectoryIo, LayoutAndRoundTrip) {
    const Trajectory tr = short_run();
    const auto dir = degchemo::testing::scratch_dir("traj_roundtrip");
    save_trajectory(dir, tr, nlohmann::json{{"note", "x"}}, to_json(default_params()));
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "M_0000.fld"));
    EXPECT_TRUE(fs::exists(dir / "rho_0003.fld"));
    EXPECT_FALSE(fs::exists(dir / "M_0004.fld"));

    const auto loaded = load_trajectory(dir);
    ASSERT_EQ(loaded.trajectory.snapshots.size(), tr.snapshots.size());
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        const auto& a = tr.snapshots[k];
        const auto& b = loaded.trajectory.snapshots[k];
        EXPECT_EQ(a.time, b.time);
        EXPECT_EQ(std::memcmp(a.M.values.data(), b.M.values.data(), a.M.size() * sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(a.rho.values.data(), b.rho.values.data(), a.rho.size() * sizeof(double)), 0);
    }
    EXPECT_EQ(loaded.trajectory.steps, tr.steps);
    EXPECT_EQ(loaded.trajectory.config_hash, tr.config_hash);
    EXPECT_EQ(loaded.manifest.at("config").at("note"), "x");
    EXPECT_EQ(loaded.manifest.at("hashes").at("snapshots").size(), tr.snapshots.size());
}

TEST(TrajectoryIo, ReproducibleBytes) {
    const auto a = degchemo::testing::scratch_dir("traj_a");
    const auto b = degchemo::testing::scratch_dir("traj_b");
    save_trajectory(a, short_run(), {}, {});
    save_trajectory(b, short_run(), {}, {});
    EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
    EXPECT_EQ(slurp(a / "M_0002.fld"), slurp(b / "M_0002.fld"));
}

TEST(TrajectoryIo, TamperedSnapshotRejected) {
    const auto dir = degchemo::testing::scratch_dir("traj_tamper");
    save_trajectory(dir, short_run(), {}, {});
    ScalarField f = load_field(dir / "M_0001.fld");
    f.values[10] += 1e-9;
    save_field(dir / "M_0001.fld", f);
    EXPECT_THROW(load_trajectory(dir), InvalidArgument);
}

TEST(TrajectoryIo, MissingManifestRejected) {
    EXPECT_THROW(load_trajectory(degchemo::testing::scratch_dir("traj_empty")), InvalidArgument);
}

TEST(TrajectoryIo, HexHashFormat) {
    EXPECT_EQ(hex_hash(0), "0000000000000000");
    EXPECT_EQ(hex_hash(0xabcdefULL), "0000000000abcdef");
}
