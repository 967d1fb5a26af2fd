#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "degchemo/analysis.hpp"
#include "degchemo/solver.hpp"
#include "test_util.hpp"

using namespace degchemo;
using degchemo::testing::bump1d;
using degchemo::testing::pi;

namespace {

State bump_state(int n, double amplitude = 1.0) {
    const Grid g = make_grid_1d(1.0, n);
    return make_state(bump1d(n, 0.5, 0.2, amplitude), ScalarField(g, 1.0, 1.0));
}

State random_state(const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double scale = 3.0 * u(rng);
    ScalarField M(g, 0.0), rho(g, 0.0, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        M.values[i] = u(rng) < 0.3 ? 0.0 : scale * u(rng);
        rho.values[i] = 2.0 * u(rng);
    }
    return make_state(std::move(M), std::move(rho));
}

double min_value(const ScalarField& f) { return *std::min_element(f.values.begin(), f.values.end()); }

bool bitwise_equal(const ScalarField& a, const ScalarField& b) {
    return a.size() == b.size() && std::memcmp(a.values.data(), b.values.data(), a.size() * sizeof(double)) == 0;
}

// Average neighbouring cells of a 2n-cell 1D field onto n cells.
ScalarField restrict_half(const ScalarField& fine) {
    const int n = fine.grid.cells(0) / 2;
    ScalarField coarse(make_grid_1d(fine.grid.length(0), n), 0.0, fine.boundary_value);
    for (int i = 0; i < n; ++i) coarse.values[i] = 0.5 * (fine.values[2 * i] + fine.values[2 * i + 1]);
    return coarse;
}

}  // namespace

TEST(MakeState, ForcesTracesAndRejectsNegatives) {
    const Grid g = make_grid_1d(1.0, 8);
    const State s = make_state(ScalarField(g, 0.5, 7.0), ScalarField(g, 1.0, 7.0));
    EXPECT_EQ(s.M.boundary_value, 0.0);
    EXPECT_EQ(s.rho.boundary_value, 1.0);
    ScalarField bad(g, 0.5);
    bad.values[2] = -1e-300;
    EXPECT_THROW(make_state(bad, ScalarField(g, 1.0)), InvalidArgument);
    EXPECT_THROW(make_state(ScalarField(g, 0.0), ScalarField(make_grid_1d(1.0, 9), 1.0)), InvalidArgument);
}

TEST(StableDt, DiffusiveBoundAtRest) {
    const int n = 64;
    const Grid g = make_grid_1d(1.0, n);
    const State s = make_state(ScalarField(g, 0.0), ScalarField(g, 1.0, 1.0));
    SolverConfig c;
    const double h = 1.0 / n;
    const double diffusive = h * h / (2.0 * std::pow(0.1, 4));
    EXPECT_NEAR(stable_dt(s, default_params(), c), c.cfl_safety * std::min(diffusive, c.dt_max), 1e-15);
    c.dt_max = 100.0;
    EXPECT_NEAR(stable_dt(s, default_params(), c), c.cfl_safety * diffusive, 1e-12 * diffusive);
}

TEST(StableDt, ResolutionAndSafetyScaling) {
    SolverConfig c;
    c.dt_max = 100.0;
    const ModelParams p = default_params();
    auto at_rest = [](int n) {
        const Grid g = make_grid_1d(1.0, n);
        return make_state(ScalarField(g, 0.0), ScalarField(g, 1.0, 1.0));
    };
    EXPECT_NEAR(stable_dt(at_rest(128), p, c) / stable_dt(at_rest(64), p, c), 0.25, 1e-12);

    SolverConfig half, full;
    half.cfl_safety = 0.5;
    full.cfl_safety = 1.0;
    EXPECT_NEAR(stable_dt(at_rest(64), p, half) / stable_dt(at_rest(64), p, full), 0.5, 1e-12);
}

TEST(StableDt, ImplicitDiffusionDropsDiffusiveTerm) {
    const State s = bump_state(64, 25.0);
    SolverConfig c;
    const double explicit_dt = stable_dt(s, default_params(), c);
    c.implicit_diffusion = true;
    EXPECT_GT(stable_dt(s, default_params(), c), 100.0 * explicit_dt);
}

TEST(Step, RejectsOversizedDt) {
    const State s = bump_state(64);
    const SolverConfig c;
    const double dt = stable_dt(s, default_params(), c);
    EXPECT_NO_THROW(step(s, default_params(), c, dt));
    EXPECT_THROW(step(s, default_params(), c, 10.0 * dt / c.cfl_safety), InvalidArgument);
    EXPECT_THROW(step(s, default_params(), c, 0.0), InvalidArgument);
}

TEST(Step, ZeroBiomassStaysExactlyZero) {
    for (bool implicit : {false, true}) {
        const Grid g = make_grid_2d(1.0, 1.0, 16, 16);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 2.0);
        ScalarField rho(g, 0.0, 1.0);
        for (double& v : rho.values) v = u(rng);
        SolverConfig c;
        c.t_end = 0.5;
        c.implicit_diffusion = implicit;
        const auto tr = evolve(make_state(ScalarField(g, 0.0), rho), default_params(), c);
        for (const auto& s : tr.snapshots) {
            for (double v : s.M.values) ASSERT_EQ(v, 0.0);
        }
    }
}

TEST(Step, NutrientStaysOneWithoutConsumption) {
    const Grid g = make_grid_1d(1.0, 64);
    SolverConfig c;
    c.t_end = 1.0;
    const auto tr = evolve(make_state(bump1d(64, 0.5, 0.2, 1e-3), ScalarField(g, 1.0, 1.0)),
                           default_params(SpecKind::example1), c);
    for (const auto& s : tr.snapshots) {
        for (double v : s.rho.values) ASSERT_NEAR(v, 1.0, 1e-13);
    }
}

TEST(Step, PositivityOnRandomData) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const Grid g = trial % 3 == 0 ? make_grid_2d(1.0, 1.0, 12, 10) : make_grid_1d(1.0, 48);
        const State s0 = random_state(g, rng);
        SolverConfig c;
        c.t_end = 0.2;
        c.snapshot_every = 0.02;
        c.implicit_diffusion = trial % 2 == 1;
        const auto tr = evolve(s0, default_params(), c);
        for (const auto& s : tr.snapshots) {
            ASSERT_GE(min_value(s.M), 0.0);
            ASSERT_GE(min_value(s.rho), 0.0);
        }
    }
}

TEST(Step, TransportBudgetIsExact) {
    for (bool implicit : {false, true}) {
        const State s = bump_state(64, 2.0);
        SolverConfig c;
        c.implicit_diffusion = implicit;
        const ModelParams p = default_params();
        StepInfo info;
        const double dt = stable_dt(s, p, c);
        const State n = step(s, p, c, dt, &info);
        const double lhs = integrate(n.M) - integrate(s.M);
        EXPECT_NEAR(lhs, dt * info.boundary_flux + info.reaction_change, 1e-12);
    }
}

TEST(Step, MassBudgetWithExplicitReaction) {
    // f = -M with F5 = 0 keeps the reaction in its explicit branch
    ModelParams p = default_params(SpecKind::example1);
    p.F5 = 0.0;
    const State s = bump_state(64, 0.5);
    ASSERT_EQ(s.M.values.front(), 0.0);
    ASSERT_EQ(s.M.values.back(), 0.0);
    const SolverConfig c;
    StepInfo info;
    const double dt = stable_dt(s, p, c);
    const State n = step(s, p, c, dt, &info);
    ScalarField f(s.M.grid, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = eval_f(p, s.M.values[i], n.rho.values[i]);
    EXPECT_NEAR(integrate(n.M) - integrate(s.M), dt * (info.boundary_flux - integrate(f)), 1e-12);
}

TEST(Step, NonFiniteReactionRaisesStepFailure) {
    ModelParams p = default_params();
    p.spec.kind = SpecKind::custom;
    p.spec.f = [](double M, double) { return M > 0.5 ? std::numeric_limits<double>::quiet_NaN() : M; };
    p.spec.g = [](double, double rho) { return rho; };
    p.spec.f_tilde = [](double, double) { return 0.0; };
    p.spec.g2 = [](double) { return 0.0; };
    const State s = bump_state(32);
    SolverConfig c;
    c.t_end = 0.1;
    try {
        evolve(s, p, c);
        FAIL() << "expected StepFailure";
    } catch (const StepFailure& e) {
        EXPECT_EQ(e.last_good().time, 0.0);
        EXPECT_TRUE(bitwise_equal(e.last_good().M, s.M));
    }
}

TEST(Evolve, ZeroDurationKeepsOnlyInitialState) {
    const State s = bump_state(32);
    SolverConfig c;
    c.t_end = 0.0;
    const auto tr = evolve(s, default_params(), c);
    ASSERT_EQ(tr.snapshots.size(), 1u);
    EXPECT_EQ(tr.steps, 0);
    EXPECT_TRUE(bitwise_equal(tr.snapshots[0].M, s.M));
}

TEST(Evolve, SnapshotScheduleAndExactEnd) {
    State s = bump_state(32);
    s.time = 2.0;
    SolverConfig c;
    c.t_end = 0.35;
    c.snapshot_every = 0.1;
    const auto tr = evolve(s, default_params(), c);
    const auto t = tr.times();
    ASSERT_EQ(t.size(), 5u);
    EXPECT_EQ(t.front(), 2.0);
    EXPECT_NEAR(t[1], 2.1, 1e-12);
    EXPECT_NEAR(t[3], 2.3, 1e-12);
    EXPECT_EQ(t.back(), 2.35);
    EXPECT_GT(tr.steps, 0);
    EXPECT_NE(tr.config_hash, 0u);
}

TEST(Evolve, StepBudgetRaises) {
    SolverConfig c;
    c.max_steps = 3;
    EXPECT_THROW(evolve(bump_state(32), default_params(), c), StepFailure);
}

TEST(Evolve, Deterministic) {
    SolverConfig c;
    c.t_end = 0.3;
    const auto a = evolve(bump_state(48, 2.0), default_params(), c);
    const auto b = evolve(bump_state(48, 2.0), default_params(), c);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        EXPECT_TRUE(bitwise_equal(a.snapshots[k].M, b.snapshots[k].M));
        EXPECT_TRUE(bitwise_equal(a.snapshots[k].rho, b.snapshots[k].rho));
    }
}

TEST(Evolve, SemigroupWithinSelfConvergenceError) {
    const ModelParams p = default_params();
    SolverConfig c;
    c.snapshot_every = 0.0;
    c.t_end = 0.3;
    const State mid = evolve(bump_state(64), p, c).snapshots.back();
    c.t_end = 0.2;
    const State split = evolve(mid, p, c).snapshots.back();
    c.t_end = 0.5;
    const State whole = evolve(bump_state(64), p, c).snapshots.back();
    const State fine = evolve(bump_state(128), p, c).snapshots.back();

    ScalarField d = split.M;
    ScalarField e = whole.M;
    const ScalarField fr = restrict_half(fine.M);
    for (std::size_t i = 0; i < d.size(); ++i) {
        d.values[i] -= whole.M.values[i];
        e.values[i] -= fr.values[i];
    }
    EXPECT_NEAR(split.time, 0.5, 1e-15);
    EXPECT_LE(lp_norm(d, 2.0), 10.0 * lp_norm(e, 2.0));
}

TEST(Evolve, CompactBumpHasFiniteFront) {
    SolverConfig c;
    c.t_end = 0.5;
    c.reg_n = 100;
    const State s0 = bump_state(128, 0.5);
    const auto tr = evolve(s0, default_params(), c);
    const double r0 = support_measure(s0.M).radius;
    const double r1 = support_measure(tr.snapshots.back().M).radius;
    EXPECT_GE(r1, r0);
    EXPECT_LT(r1 - r0, 1.0);
    EXPECT_LT(support_measure(tr.snapshots.back().M).measure, 1.0);
}

TEST(Evolve, NondegenerateFillsDomainInOneStep) {
    const State s0 = bump_state(64);
    SolverConfig c;
    c.nondegenerate = true;
    const State s1 = step(s0, default_params(), c, stable_dt(s0, default_params(), c));
    EXPECT_EQ(support_measure(s1.M).measure, 1.0);
    EXPECT_LT(support_measure(s0.M).measure, 1.0);
}

TEST(EvolvePair, IdenticalInputsStayIdentical) {
    const Grid g = make_grid_1d(1.0, 32);
    const NormWorkspace ws(g);
    SolverConfig c;
    c.t_end = 0.5;
    const auto pt = evolve_pair(bump_state(32), bump_state(32), default_params(), c, ws);
    for (const auto& n : pt.norms) {
        EXPECT_EQ(n.x_combined, 0.0);
        EXPECT_EQ(n.linf_W, 0.0);
        EXPECT_EQ(n.linf_v, 0.0);
    }
}

TEST(EvolvePair, RhoOnlyPerturbationAndFiniteRatio) {
    const int n = 64;
    const Grid g = make_grid_1d(1.0, n);
    const NormWorkspace ws(g);
    const State a = bump_state(n);
    State b = a;
    const double eps = 1e-3;
    for (std::size_t i = 0; i < g.size(); ++i) b.rho.values[i] += eps * std::sin(pi * g.center(i)[0]);
    SolverConfig c;
    c.t_end = 5.0;
    c.snapshot_every = 0.25;
    const auto pt = evolve_pair(a, b, default_params(), c, ws);
    EXPECT_EQ(pt.norms.front().h_minus1_W, 0.0);
    EXPECT_NEAR(pt.norms.front().x_combined, eps * lp_norm(degchemo::testing::sine1d(n), 2.0), 1e-15);
    double sup = 0.0;
    for (const auto& d : pt.norms) sup = std::max(sup, d.x_combined / pt.norms.front().x_combined);
    EXPECT_TRUE(std::isfinite(sup));
    EXPECT_LT(sup, 100.0);
    EXPECT_EQ(pt.a.snapshots.size(), pt.norms.size());
    EXPECT_EQ(pt.a.snapshots.back().time, 5.0);
}

TEST(ImplicitDiffusion, ConstantPreservedAndNonnegative) {
    const ScalarField ones(make_grid_1d(1.0, 50), 1.0, 1.0);
    for (double v : implicit_diffusion(ones, 0.1).values) EXPECT_NEAR(v, 1.0, 1e-14);
    const ScalarField b = bump1d(50, 0.5, 0.1);
    for (double v : implicit_diffusion(b, 0.05).values) EXPECT_GE(v, 0.0);
    const ScalarField g2(make_grid_2d(1.0, 1.0, 10, 10), 1.0, 1.0);
    for (double v : implicit_diffusion(g2, 0.1).values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(ImplicitDiffusion, Absorption) {
    const ScalarField r(make_grid_1d(1.0, 20), 2.0, 1.0);
    const std::vector<double> k(20, 3.0);
    for (double v : implicit_diffusion(r, 0.1, 0.0, k).values) EXPECT_DOUBLE_EQ(v, 2.0 / 1.3);
    const ScalarField x = implicit_diffusion(ScalarField(r.grid, 1.0, 1.0), 0.1, 1.0, k);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_GT(x.values[i], 0.0);
        EXPECT_LT(x.values[i], 1.0);
    }
    EXPECT_GT(x.values[0], x.values[10]);
    const ScalarField y = implicit_diffusion(ScalarField(make_grid_2d(1.0, 1.0, 6, 6), 1.0, 1.0), 0.1, 1.0,
                                             std::vector<double>(36, 3.0));
    for (double v : y.values) EXPECT_LT(v, 1.0);
    EXPECT_THROW(implicit_diffusion(r, 0.1, 1.0, std::vector<double>(3, 1.0)), InvalidArgument);
}

TEST(Step, SteadyStateIsIndependentOfStepSize) {
    const int n = 64;
    const Grid g = make_grid_1d(1.0, n);
    const ModelParams p = default_params();
    SolverConfig c;
    State s = make_state(ScalarField(g, 0.0), ScalarField(g, 1.0, 1.0));
    for (int k = 0; k < 4000; ++k) s = step(s, p, c, stable_dt(s, p, c));
    for (double dt : {1e-3, 1e-6}) {
        const State t = step(s, p, c, dt);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(t.rho.values[i], s.rho.values[i], 1e-9) << dt;
    }
}

TEST(SolverConfigJson, RoundTripAndValidation) {
    SolverConfig c;
    c.reg_n = 40;
    c.implicit_diffusion = true;
    const SolverConfig d = solver_config_from_json(to_json(c));
    EXPECT_EQ(d.reg_n, 40);
    EXPECT_TRUE(d.implicit_diffusion);
    EXPECT_EQ(to_json(d), to_json(c));
    EXPECT_THROW(solver_config_from_json(nlohmann::json{{"dt_max", -1.0}}), InvalidArgument);
    EXPECT_THROW(solver_config_from_json(nlohmann::json{{"scheme", "rk4"}}), InvalidArgument);
    EXPECT_THROW(solver_config_from_json(nlohmann::json{{"cfl", 0.5}}), InvalidArgument);
}
