#include "degchemo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Sparse>

#include "degchemo/hash.hpp"

namespace degchemo {

State make_state(ScalarField M, ScalarField rho, double time) {
    require_same_grid(M.grid, rho.grid, "make_state");
    M.check();
    rho.check();
    M.boundary_value = 0.0;
    rho.boundary_value = 1.0;
    for (std::size_t i = 0; i < M.size(); ++i) {
        if (M.values[i] < 0.0 || rho.values[i] < 0.0) throw InvalidArgument("initial data must be nonnegative");
    }
    return State{std::move(M), std::move(rho), time};
}

void SolverConfig::check() const {
    if (reg_n < 1) throw InvalidArgument("solver.reg_n must be >= 1");
    if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw InvalidArgument("solver.dt_max must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw InvalidArgument("solver.cfl_safety must lie in (0, 1]");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidArgument("solver.t_end must be >= 0");
    if (!std::isfinite(snapshot_every)) throw InvalidArgument("solver.snapshot_every must be finite");
    if (max_steps < 1) throw InvalidArgument("solver.max_steps must be >= 1");
}

nlohmann::json to_json(const SolverConfig& c) {
    return nlohmann::json{{"reg_n", c.reg_n},
                          {"dt_max", c.dt_max},
                          {"cfl_safety", c.cfl_safety},
                          {"t_end", c.t_end},
                          {"snapshot_every", c.snapshot_every},
                          {"scheme", "imex_upwind"},
                          {"nondegenerate", c.nondegenerate},
                          {"implicit_diffusion", c.implicit_diffusion},
                          {"max_steps", c.max_steps}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig c) {
    static const std::set<std::string> known{"reg_n", "dt_max", "cfl_safety", "t_end", "snapshot_every",
                                             "scheme", "nondegenerate", "implicit_diffusion", "max_steps"};
    if (!j.is_object()) throw InvalidArgument("solver must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw InvalidArgument("unknown key '" + it.key() + "' in solver");
    }
    try {
        if (j.contains("reg_n")) c.reg_n = j.at("reg_n").get<int>();
        if (j.contains("dt_max")) c.dt_max = j.at("dt_max").get<double>();
        if (j.contains("cfl_safety")) c.cfl_safety = j.at("cfl_safety").get<double>();
        if (j.contains("t_end")) c.t_end = j.at("t_end").get<double>();
        if (j.contains("snapshot_every")) c.snapshot_every = j.at("snapshot_every").get<double>();
        if (j.contains("nondegenerate")) c.nondegenerate = j.at("nondegenerate").get<bool>();
        if (j.contains("implicit_diffusion")) c.implicit_diffusion = j.at("implicit_diffusion").get<bool>();
        if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<long>();
        if (j.contains("scheme") && j.at("scheme").get<std::string>() != "imex_upwind") {
            throw InvalidArgument("solver.scheme must be \"imex_upwind\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad solver config: ") + e.what());
    }
    c.check();
    return c;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    t.reserve(snapshots.size());
    for (const auto& s : snapshots) t.push_back(s.time);
    return t;
}

namespace {

bool implicit_m_diffusion(const SolverConfig& c) { return c.nondegenerate || c.implicit_diffusion; }

// Explicit part of the M update in coefficient form
//   M'_i = (1 - dt*rate_i) M_i + dt*gain_i
// (upwind taxis, plus diffusion unless it is implicit) and the face
// conductances D/h^2 of the implicit diffusion that follows.
struct Sweep {
    std::vector<double> rate;
    std::vector<double> gain;
    std::vector<double> boundary_rate;
    std::array<std::vector<double>, 2> conductance;  // indexed like VectorField components
    double Dmax = 0.0;
    double umax = 0.0;
    double max_rate = 0.0;
};

Sweep face_sweep(const State& s, const ModelParams& params, const SolverConfig& config) {
    const Grid& g = s.M.grid;
    const auto& M = s.M.values;
    const auto& r = s.rho.values;
    const double rb2 = 2.0 * s.rho.boundary_value;
    const double eps = 1.0 / config.reg_n;
    const bool implicit = implicit_m_diffusion(config);
    Sweep w;
    w.rate.assign(g.size(), 0.0);
    w.gain.assign(g.size(), 0.0);
    w.boundary_rate.assign(g.size(), 0.0);
    w.conductance[0].assign(g.face_count(0), 0.0);
    if (g.dim() == 2) w.conductance[1].assign(g.face_count(1), 0.0);

    auto face = [&](std::ptrdiff_t L, std::ptrdiff_t R, double h, double& conductance) {
        const double mL = L >= 0 ? M[L] : -M[R];
        const double mR = R >= 0 ? M[R] : -M[L];
        const double base = 0.5 * (mL + mR) + eps;
        const double rL = L >= 0 ? r[L] : rb2 - r[R];
        const double rR = R >= 0 ? r[R] : rb2 - r[L];
        const double u = std::pow(base, params.gamma - 1.0) * (rR - rL) / h;
        const double ku = std::abs(u) / h;
        w.umax = std::max(w.umax, std::abs(u));
        const bool boundary = L < 0 || R < 0;

        const double D = config.nondegenerate ? 1.0 : std::pow(base, params.alpha);
        w.Dmax = std::max(w.Dmax, D);
        const double kd = (boundary ? 2.0 : 1.0) * D / (h * h);
        if (implicit) {
            conductance = kd;
        } else if (!boundary) {
            w.rate[L] += kd;
            w.rate[R] += kd;
            w.gain[L] += kd * M[R];
            w.gain[R] += kd * M[L];
        } else {
            const auto c = L >= 0 ? L : R;
            w.rate[c] += kd;
            w.boundary_rate[c] += kd;
        }

        if (u > 0.0) {
            if (L >= 0) {
                w.rate[L] += ku;
                if (R >= 0) w.gain[R] += ku * M[L]; else w.boundary_rate[L] += ku;
            }
        } else if (u < 0.0) {
            if (R >= 0) {
                w.rate[R] += ku;
                if (L >= 0) w.gain[L] += ku * M[R]; else w.boundary_rate[R] += ku;
            }
        }
    };

    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    for (int i = 0; i <= n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            face(i > 0 ? static_cast<std::ptrdiff_t>(g.index(i - 1, j)) : -1,
                 i < n0 ? static_cast<std::ptrdiff_t>(g.index(i, j)) : -1, g.spacing(0),
                 w.conductance[0][static_cast<std::size_t>(i) * n1 + j]);
        }
    }
    if (g.dim() == 2) {
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j <= n1; ++j) {
                face(j > 0 ? static_cast<std::ptrdiff_t>(g.index(i, j - 1)) : -1,
                     j < n1 ? static_cast<std::ptrdiff_t>(g.index(i, j)) : -1, g.spacing(1),
                     w.conductance[1][static_cast<std::size_t>(i) * (n1 + 1) + j]);
            }
        }
    }
    for (double v : w.rate) w.max_rate = std::max(w.max_rate, v);
    return w;
}

double dt_bound(const Sweep& w, const Grid& g, const SolverConfig& config, double cfl) {
    const double h = g.min_spacing();
    double bound = config.dt_max;
    if (!implicit_m_diffusion(config) && w.Dmax > 0.0) bound = std::min(bound, h * h / (2.0 * g.dim() * w.Dmax));
    if (w.umax > 0.0) bound = std::min(bound, h / (2.0 * w.umax));
    double dt = cfl * bound;
    if (w.max_rate > 0.0) dt = std::min(dt, 1.0 / w.max_rate);
    return dt;
}

// (I - dt div(K grad)) x = rhs with face conductances K and the Dirichlet trace of rhs.
ScalarField implicit_face_diffusion(const ScalarField& rhs, double dt, const std::array<std::vector<double>, 2>& K) {
    const Grid& g = rhs.grid;
    const double b = rhs.boundary_value;
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    ScalarField x(g, 0.0, b);
    if (g.dim() == 1) {
        // s_i = 1 - c_i is carried explicitly so every quantity stays a sum of nonnegative terms.
        std::vector<double> c(n0), s(n0), d(n0);
        for (int i = 0; i < n0; ++i) {
            const double aL = dt * K[0][i];
            const double aR = dt * K[0][i + 1];
            double rhs_i = rhs.values[i];
            if (i == 0) rhs_i += aL * b;
            if (i == n0 - 1) rhs_i += aR * b;
            const double carried = i > 0 ? aL * s[i - 1] : aL;
            const double denom = 1.0 + aR + carried;
            const double up = i < n0 - 1 ? aR : 0.0;
            c[i] = up / denom;
            s[i] = (1.0 + carried + (aR - up)) / denom;
            d[i] = (rhs_i + (i > 0 ? aL * d[i - 1] : 0.0)) / denom;
        }
        x.values[n0 - 1] = d[n0 - 1];
        for (int i = n0 - 2; i >= 0; --i) x.values[i] = d[i] + c[i] * x.values[i + 1];
        return x;
    }

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(5 * g.size());
    Eigen::VectorXd f(static_cast<Eigen::Index>(g.size()));
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const auto c = static_cast<Eigen::Index>(g.index(i, j));
            const double a[4] = {dt * K[0][static_cast<std::size_t>(i) * n1 + j],
                                 dt * K[0][static_cast<std::size_t>(i + 1) * n1 + j],
                                 dt * K[1][static_cast<std::size_t>(i) * (n1 + 1) + j],
                                 dt * K[1][static_cast<std::size_t>(i) * (n1 + 1) + j + 1]};
            const bool inside[4] = {i > 0, i < n0 - 1, j > 0, j < n1 - 1};
            const Eigen::Index nb[4] = {c - n1, c + n1, c - 1, c + 1};
            double diag = 1.0;
            double src = rhs.values[static_cast<std::size_t>(c)];
            for (int k = 0; k < 4; ++k) {
                diag += a[k];
                if (inside[k]) entries.emplace_back(c, nb[k], -a[k]);
                else src += a[k] * b;
            }
            entries.emplace_back(c, c, diag);
            f[c] = src;
        }
    }
    Eigen::SparseMatrix<double> A(f.size(), f.size());
    A.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw SolverError("implicit diffusion factorization failed");
    const Eigen::VectorXd sol = solver.solve(f);
    const double residual = (A * sol - f).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-9 * std::max(1.0, f.lpNorm<Eigen::Infinity>()))) {
        throw SolverError("implicit diffusion solve inaccurate", residual);
    }
    // The exact solution is nonnegative for nonnegative data; drop roundoff below zero.
    for (std::size_t k = 0; k < g.size(); ++k) x.values[k] = std::max(0.0, sol[static_cast<Eigen::Index>(k)]);
    return x;
}

void require_finite_nonnegative(const State& next, const State& prev, const char* what) {
    for (std::size_t i = 0; i < next.M.size(); ++i) {
        const double m = next.M.values[i];
        const double r = next.rho.values[i];
        if (!std::isfinite(m) || !std::isfinite(r)) {
            throw StepFailure(std::string("non-finite value after ") + what + " at t=" + std::to_string(prev.time), prev);
        }
        if (m < 0.0 || r < 0.0) {
            throw StepFailure(std::string("negative value after ") + what + " at t=" + std::to_string(prev.time), prev);
        }
    }
}

}  // namespace

double stable_dt(const State& s, const ModelParams& params, const SolverConfig& config) {
    return dt_bound(face_sweep(s, params, config), s.M.grid, config, config.cfl_safety);
}

ScalarField implicit_diffusion(const ScalarField& rhs, double dt, double D, std::span<const double> absorption) {
    const Grid& g = rhs.grid;
    const double b = rhs.boundary_value;
    ScalarField x(g, 0.0, b);
    if (!absorption.empty() && absorption.size() != g.size()) {
        throw InvalidArgument("implicit_diffusion: absorption needs one rate per cell");
    }
    auto sink = [&](std::size_t c) { return absorption.empty() ? 0.0 : dt * absorption[c]; };
    if (dt == 0.0 || D == 0.0) {
        for (std::size_t c = 0; c < g.size(); ++c) x.values[c] = rhs.values[c] / (1.0 + sink(c));
        return x;
    }
    const double r0 = dt * D / (g.spacing(0) * g.spacing(0));
    const int n0 = g.cells(0);
    if (g.dim() == 1) {
        // Elimination keeps every quantity a sum of nonnegative terms when rhs, b >= 0.
        std::vector<double> cp(n0), dp(n0);
        for (int i = 0; i < n0; ++i) {
            double diag = 1.0 + 2.0 * r0 + sink(i);
            double d = rhs.values[i];
            if (i == 0 || i == n0 - 1) {
                diag += r0;
                d += 2.0 * b * r0;
            }
            if (i > 0) {
                const double denom = diag - r0 * cp[i - 1];
                cp[i] = r0 / denom;
                dp[i] = (d + r0 * dp[i - 1]) / denom;
            } else {
                cp[i] = r0 / diag;
                dp[i] = d / diag;
            }
        }
        x.values[n0 - 1] = dp[n0 - 1];
        for (int i = n0 - 2; i >= 0; --i) x.values[i] = dp[i] + cp[i] * x.values[i + 1];
        return x;
    }

    const int n1 = g.cells(1);
    const double r1 = dt * D / (g.spacing(1) * g.spacing(1));
    std::vector<double> diag(g.size()), src(g.size());
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const auto c = g.index(i, j);
            double dg = 1.0 + 2.0 * r0 + 2.0 * r1 + sink(c);
            double s = rhs.values[c];
            if (i == 0 || i == n0 - 1) { dg += r0; s += 2.0 * b * r0; }
            if (j == 0 || j == n1 - 1) { dg += r1; s += 2.0 * b * r1; }
            diag[c] = dg;
            src[c] = s;
        }
    }
    x.values = rhs.values;
    constexpr int max_sweeps = 200000;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        double scale = 0.0;
        for (int i = 0; i < n0; ++i) {
            for (int j = 0; j < n1; ++j) {
                const auto c = g.index(i, j);
                double acc = src[c];
                if (i > 0) acc += r0 * x.values[g.index(i - 1, j)];
                if (i < n0 - 1) acc += r0 * x.values[g.index(i + 1, j)];
                if (j > 0) acc += r1 * x.values[g.index(i, j - 1)];
                if (j < n1 - 1) acc += r1 * x.values[g.index(i, j + 1)];
                const double nv = acc / diag[c];
                change = std::max(change, std::abs(nv - x.values[c]));
                scale = std::max(scale, std::abs(nv));
                x.values[c] = nv;
            }
        }
        if (change <= 1e-14 * std::max(scale, 1e-300)) return x;
    }
    throw SolverError("Gauss-Seidel diffusion solve did not converge");
}

State step(const State& s, const ModelParams& params, const SolverConfig& config, double dt, StepInfo* info) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step needs a positive finite dt");
    const Grid& g = s.M.grid;
    const Sweep w = face_sweep(s, params, config);
    const double limit = dt_bound(w, g, config, 1.0);
    if (dt > limit * (1.0 + 1e-12)) {
        throw InvalidArgument("dt=" + std::to_string(dt) + " exceeds the admissible step " + std::to_string(limit));
    }

    State next{ScalarField(g, 0.0, s.M.boundary_value), ScalarField(g, 0.0, s.rho.boundary_value), s.time + dt};

    // nutrient: consumption g >= 0 enters the implicit solve as the rate g/rho, anything else explicitly
    {
        std::vector<double> rate(g.size(), 0.0);
        ScalarField rhs = s.rho;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = s.rho.values[i];
            const double sink = eval_g(params, s.M.values[i], r);
            if (sink >= 0.0 && r > 0.0) {
                rate[i] = sink / r;
            } else {
                rhs.values[i] -= dt * sink;
            }
        }
        next.rho = implicit_diffusion(rhs, dt, 1.0, rate);
    }

    // biomass: explicit upwind taxis (and diffusion), optionally followed by implicit diffusion
    ScalarField Mt(g, 0.0, s.M.boundary_value);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Mt.values[i] = std::max(0.0, 1.0 - dt * w.rate[i]) * s.M.values[i] + dt * w.gain[i];
    }
    double boundary_flux = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) boundary_flux -= w.boundary_rate[i] * s.M.values[i];
    boundary_flux *= g.cell_volume();
    if (implicit_m_diffusion(config)) {
        const double before = integrate(Mt);
        Mt = implicit_face_diffusion(Mt, dt, w.conductance);
        boundary_flux += (integrate(Mt) - before) / dt;
    }

    // biomass reaction: exact decay for F5 M, the remainder explicit or Patankar-weighted
    const double E = std::exp(-params.F5 * dt);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m0 = s.M.values[i];
        const double rem = eval_f(params, m0, next.rho.values[i]) - params.F5 * m0;
        next.M.values[i] = rem <= 0.0 ? E * Mt.values[i] - dt * rem
                        : m0 > 0.0 ? E * Mt.values[i] / (1.0 + dt * rem / m0) : E * Mt.values[i];
    }

    require_finite_nonnegative(next, s, "step");
    if (info) {
        info->boundary_flux = boundary_flux;
        info->reaction_change = integrate(next.M) - integrate(Mt);
    }
    return next;
}

namespace {

State lerp(const State& a, const State& b, double time) {
    const double span = b.time - a.time;
    const double t = span > 0.0 ? (time - a.time) / span : 1.0;
    if (t >= 1.0) {
        State out = b;
        out.time = time;
        return out;
    }
    State out = a;
    out.time = time;
    for (std::size_t i = 0; i < a.M.size(); ++i) {
        out.M.values[i] = (1.0 - t) * a.M.values[i] + t * b.M.values[i];
        out.rho.values[i] = (1.0 - t) * a.rho.values[i] + t * b.rho.values[i];
    }
    return out;
}

std::vector<double> snapshot_targets(double t0, const SolverConfig& c) {
    std::vector<double> out;
    const double t1 = t0 + c.t_end;
    const double eps = 1e-12 * std::max(1.0, c.t_end);
    if (c.snapshot_every > 0.0) {
        for (long j = 1;; ++j) {
            const double t = t0 + static_cast<double>(j) * c.snapshot_every;
            if (t >= t1 - eps) break;
            out.push_back(t);
        }
    }
    if (c.t_end > 0.0) out.push_back(t1);
    return out;
}

void stamp(Trajectory& tr, const ModelParams& params, const SolverConfig& config) {
    tr.config_hash = fnv1a(to_json(config).dump());
    tr.model_hash = fnv1a(to_json(params).dump());
}

}  // namespace

Trajectory evolve(const State& state0, const ModelParams& params, const SolverConfig& config) {
    config.check();
    require_same_grid(state0.M.grid, state0.rho.grid, "evolve");
    Trajectory tr;
    stamp(tr, params, config);
    tr.snapshots.push_back(state0);
    const auto targets = snapshot_targets(state0.time, config);
    if (targets.empty()) return tr;
    const double t1 = targets.back();

    std::size_t next_target = 0;
    State cur = state0;
    while (next_target < targets.size()) {
        if (tr.steps >= config.max_steps) throw StepFailure("step budget exhausted", cur);
        double dt = stable_dt(cur, params, config);
        const double remaining = t1 - cur.time;
        if (dt >= remaining) dt = remaining;
        State nxt = step(cur, params, config, dt);
        if (dt == remaining) nxt.time = t1;
        ++tr.steps;
        while (next_target < targets.size() && targets[next_target] <= nxt.time) {
            tr.snapshots.push_back(lerp(cur, nxt, targets[next_target]));
            ++next_target;
        }
        cur = std::move(nxt);
    }
    return tr;
}

PairTrajectory evolve_pair(const State& a, const State& b, const ModelParams& params, const SolverConfig& config,
                           const NormWorkspace& ws) {
    config.check();
    require_same_grid(a.M.grid, b.M.grid, "evolve_pair");
    if (a.time != b.time) throw InvalidArgument("evolve_pair needs states at the same time");
    PairTrajectory pt;
    stamp(pt.a, params, config);
    stamp(pt.b, params, config);
    auto record = [&](const State& x, const State& y) {
        pt.a.snapshots.push_back(x);
        pt.b.snapshots.push_back(y);
        pt.norms.push_back(diff_norms(ws, x.M, x.rho, y.M, y.rho, params.alpha));
    };
    record(a, b);
    const auto targets = snapshot_targets(a.time, config);
    if (targets.empty()) return pt;
    const double t1 = targets.back();

    std::size_t next_target = 0;
    State ca = a;
    State cb = b;
    long steps = 0;
    while (next_target < targets.size()) {
        if (steps >= config.max_steps) throw StepFailure("step budget exhausted", ca);
        double dt = std::min(stable_dt(ca, params, config), stable_dt(cb, params, config));
        const double remaining = t1 - ca.time;
        if (dt >= remaining) dt = remaining;
        State na = step(ca, params, config, dt);
        State nb = step(cb, params, config, dt);
        if (dt == remaining) na.time = nb.time = t1;
        nb.time = na.time;
        ++steps;
        while (next_target < targets.size() && targets[next_target] <= na.time) {
            record(lerp(ca, na, targets[next_target]), lerp(cb, nb, targets[next_target]));
            ++next_target;
        }
        ca = std::move(na);
        cb = std::move(nb);
    }
    pt.a.steps = pt.b.steps = steps;
    return pt;
}

}  // namespace degchemo
