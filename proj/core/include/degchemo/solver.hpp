#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "degchemo/grid.hpp"
#include "degchemo/model.hpp"
#include "degchemo/norms.hpp"
#include "json.hpp"

namespace degchemo {

/// Biomass M (trace 0), nutrient rho (trace 1) and the time they belong to.
struct State {
    ScalarField M;
    ScalarField rho;
    double time = 0.0;
};

State make_state(ScalarField M, ScalarField rho, double time = 0.0);

enum class Scheme { imex_upwind };

struct SolverConfig {
    int reg_n = 10;             // regularization index n, offset 1/n
    double dt_max = 1e-2;
    double cfl_safety = 0.5;
    double t_end = 1.0;         // length of the window starting at state0.time
    double snapshot_every = 0.1;  // <= 0 keeps only the initial and final states
    Scheme scheme = Scheme::imex_upwind;
    bool nondegenerate = false;   // alpha treated as 0: D = 1, diffusion implicit
    bool implicit_diffusion = false;  // M diffusion with frozen D solved implicitly
    long max_steps = 20'000'000;

    void check() const;
};

nlohmann::json to_json(const SolverConfig& c);
/// Fills the fields present in `j` over `base`; unknown keys are rejected.
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});

struct Trajectory {
    std::vector<State> snapshots;
    std::uint64_t config_hash = 0;
    std::uint64_t model_hash = 0;
    long steps = 0;

    std::vector<double> times() const;
};

struct PairTrajectory {
    Trajectory a;
    Trajectory b;
    std::vector<DiffNorms> norms;  // one per snapshot
};

/// Raised when a step produces a non-finite or negative value.
class StepFailure : public SolverError {
public:
    StepFailure(const std::string& what, State last_good)
        : SolverError(what), last_good_(std::move(last_good)) {}
    const State& last_good() const { return last_good_; }

private:
    State last_good_;
};

/**
 * Largest admissible step:
 *   min( cfl * min(h^2/(2N Dmax), h/(2 umax), dt_max), dt_pos )
 * with D = (M + 1/n)^alpha and u = (M + 1/n)^(gamma-1) grad rho on faces.
 * dt_pos = 1 / (largest per-cell outflow rate of the explicit update) keeps
 * every coefficient of that update nonnegative. The diffusive term is dropped
 * when M diffusion is implicit (implicit_diffusion or nondegenerate).
 */
double stable_dt(const State& s, const ModelParams& params, const SolverConfig& config);

struct StepInfo {
    double boundary_flux = 0.0;    // net inflow of M through the boundary per unit time
    double reaction_change = 0.0;  // integral of M after reaction minus before
};

/// One IMEX step: nutrient diffusion with linearized-implicit consumption, explicit upwind
/// taxis and M diffusion (or implicit M diffusion), then the M reaction.
/// Throws InvalidArgument if dt exceeds the admissible step.
State step(const State& s, const ModelParams& params, const SolverConfig& config, double dt,
           StepInfo* info = nullptr);

/// Adaptive stepping over [state0.time, state0.time + t_end] with snapshots every
/// `snapshot_every`, linearly interpolated in time, plus the final time.
Trajectory evolve(const State& state0, const ModelParams& params, const SolverConfig& config);

/// Both runs share one dt sequence; DiffNorms are recorded at every snapshot.
PairTrajectory evolve_pair(const State& a, const State& b, const ModelParams& params,
                           const SolverConfig& config, const NormWorkspace& ws);

/// (I + dt*diag(absorption) - dt*D*lap) x = rhs with the Dirichlet trace of `rhs`.
/// Tridiagonal elimination in 1D, Gauss-Seidel in 2D; nonnegative data and rates keep x nonnegative.
ScalarField implicit_diffusion(const ScalarField& rhs, double dt, double D = 1.0,
                               std::span<const double> absorption = {});

}  // namespace degchemo
