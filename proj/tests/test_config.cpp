#include <gtest/gtest.h>

#include <cmath>

#include "degchemo/config.hpp"

using namespace degchemo;
using nlohmann::json;

TEST(Config, EmptyDocumentGivesDefaults) {
    const ExperimentConfig c = parse_config(json::object());
    EXPECT_EQ(c.dim, 1);
    EXPECT_EQ(c.cells[0], 64);
    EXPECT_EQ(c.model.spec.kind, SpecKind::example2_corrected);
    EXPECT_EQ(c.model.alpha, 4.0);
    EXPECT_EQ(c.initial_M.kind, "bump");
    EXPECT_EQ(c.initial_rho.kind, "constant");
    EXPECT_EQ(c.initial_rho.offset, 1.0);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.dissipative.amplitudes, (std::vector<double>{1.0, 5.0, 25.0}));
    EXPECT_EQ(c.regularization.ladder, (std::vector<int>{10, 20, 40, 80}));
}

TEST(Config, RoundTripIsExact) {
    json doc = json::object();
    apply_override(doc, "grid.dim=2");
    apply_override(doc, "grid.cells=[12,10]");
    apply_override(doc, "grid.lengths=[1.0,2.0]");
    apply_override(doc, "initial.M.kind=random_trig");
    apply_override(doc, "solver.implicit_diffusion=true");
    apply_override(doc, "studies.pair.perturb=rho");
    const ExperimentConfig c = parse_config(doc);
    const json again = to_json(c);
    EXPECT_EQ(to_json(parse_config(again)), again);
    EXPECT_EQ(config_hash(parse_config(again)), config_hash(c));
    EXPECT_EQ(c.cells[1], 10);
    EXPECT_EQ(c.lengths[1], 2.0);
    EXPECT_TRUE(c.solver.implicit_diffusion);
    EXPECT_EQ(c.pair.perturb, "rho");
}

TEST(Config, OverrideParsing) {
    json doc = json::object();
    apply_override(doc, "seed=7");
    apply_override(doc, "model.spec=example2_printed");
    apply_override(doc, "studies.smoothing.T=[0.25]");
    EXPECT_EQ(doc["seed"], 7);
    EXPECT_EQ(doc["model"]["spec"], "example2_printed");
    EXPECT_TRUE(doc["studies"]["smoothing"]["T"].is_array());
    const ExperimentConfig c = parse_config(doc);
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.model.spec.kind, SpecKind::example2_printed);
    EXPECT_EQ(c.smoothing.T, std::vector<double>{0.25});

    EXPECT_THROW(apply_override(doc, "noequals"), ConfigError);
    EXPECT_THROW(apply_override(doc, "=3"), ConfigError);
    EXPECT_THROW(apply_override(doc, "a..b=3"), ConfigError);
    EXPECT_THROW(apply_override(doc, "seed.x=3"), ConfigError);
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_THROW(parse_config(json{{"bogus", 1}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"solver", {{"dtmax", 1}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"studies", {{"nope", json::object()}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"model", {{"zeta", 1}}}}), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
    EXPECT_THROW(parse_config(json{{"grid", {{"dim", 3}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"grid", {{"cells", {0}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"solver", {{"dt_max", -1.0}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"initial", {{"M", {{"kind", "triangle"}}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"initial", {{"M", {{"amplitude", -1.0}}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"studies", {{"pair", {{"theta_ladder", {1.5}}}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"studies", {{"regularization", {{"ladder", json::array()}}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"studies", {{"dimension", {{"min_snapshots", 3}}}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"seed", "abc"}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"model", {{"alpha", -1.0}}}}), ConfigError);
}

TEST(Config, InitialKinds) {
    const Grid g = make_grid_1d(1.0, 50);
    InitialSpec s;
    s.kind = "zero";
    for (double v : make_initial(s, g, 0.0, 1).values) EXPECT_EQ(v, 0.0);
    s.kind = "constant";
    s.offset = 0.3;
    for (double v : make_initial(s, g, 0.0, 1).values) EXPECT_EQ(v, 0.3);
    s = InitialSpec{};
    const ScalarField bump = make_initial(s, g, 0.0, 1);
    EXPECT_NEAR(bump.values[25], 1.0 - std::pow(0.01 / 0.2, 2), 1e-12);
    EXPECT_EQ(bump.values[0], 0.0);
    s.kind = "plateau";
    const ScalarField plat = make_initial(s, g, 0.0, 1);
    EXPECT_EQ(plat.values[25], 1.0);
    EXPECT_EQ(plat.values[5], 0.0);
    s.kind = "sine";
    const ScalarField sine = make_initial(s, g, 0.0, 1);
    EXPECT_NEAR(sine.values[10], std::sin(M_PI * 0.21), 1e-12);
    s.kind = "random_trig";
    const ScalarField r = make_initial(s, g, 0.0, 9);
    for (double v : r.values) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0 + 1e-12);
    }
}

TEST(Config, SeedDeterminism) {
    const Grid g = make_grid_2d(1.0, 1.0, 8, 8);
    InitialSpec s;
    s.kind = "random_trig";
    EXPECT_EQ(make_initial(s, g, 0.0, 5).values, make_initial(s, g, 0.0, 5).values);
    EXPECT_NE(make_initial(s, g, 0.0, 5).values, make_initial(s, g, 0.0, 6).values);
    EXPECT_EQ(unit_uniform(0), 0.0);
    EXPECT_LT(unit_uniform(~0ull), 1.0);
}

TEST(Config, InitialStateUsesTraces) {
    const ExperimentConfig c = parse_config(json::object());
    const State s = initial_state(c);
    EXPECT_EQ(s.M.boundary_value, 0.0);
    EXPECT_EQ(s.rho.boundary_value, 1.0);
    EXPECT_EQ(s.time, 0.0);
    EXPECT_EQ(s.M.size(), 64u);
}
