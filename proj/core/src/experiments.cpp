#include "degchemo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "degchemo/analysis.hpp"
#include "degchemo/hash.hpp"
#include "degchemo/norms.hpp"
#include "degchemo/parallel.hpp"
#include "degchemo/trajectory_io.hpp"

namespace degchemo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Verdict verdict(std::string name, bool pass, double value, double threshold, std::string tolerance,
                std::string detail) {
    return {std::move(name), pass, value, threshold, std::move(tolerance), std::move(detail)};
}

SolverConfig window(const SolverConfig& base, double t_end, double every) {
    SolverConfig s = base;
    s.t_end = t_end;
    s.snapshot_every = every;
    return s;
}

ScalarField shape_of(const InitialSpec& spec, const Grid& g, double amplitude, std::uint64_t seed) {
    InitialSpec s = spec;
    s.offset = 0.0;
    s.amplitude = amplitude;
    return make_initial(s, g, 0.0, seed);
}

ScalarField sine_profile(const Grid& g) {
    InitialSpec s;
    s.kind = "sine";
    return make_initial(s, g, 0.0, 0);
}

void add_scaled(ScalarField& f, const ScalarField& g, double a) {
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] += a * g.values[i];
}

double ratio_max_min(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : inf;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

bool ExperimentReport::pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

const Verdict* ExperimentReport::find(const std::string& name) const {
    for (const auto& v : verdicts) {
        if (v.name == name) return &v;
    }
    return nullptr;
}

double dissipative_norm(const State& s) {
    const double rho_part = std::max(lp_norm(s.rho, inf), face_max_abs(gradient(s.rho)));
    return lp_norm(s.M, inf) + rho_part;
}

std::vector<std::vector<double>> feature_cloud(const Trajectory& traj, double t_from) {
    std::vector<std::vector<double>> pts;
    for (const auto& s : traj.snapshots) {
        if (s.time >= t_from - 1e-12) pts.push_back(coarse_features(s));
    }
    return pts;
}

// ---------------------------------------------------------------------------
// dissipative

namespace {

struct DecayRun {
    std::string regime;
    double amplitude = 0.0;
    double initial_norm = 0.0;
    double final_norm = 0.0;
    std::optional<DecayFit> fit;
    long steps = 0;
    std::string error;
    std::vector<std::array<double, 2>> series;
};

DecayRun decay_run(const ExperimentConfig& c, const ModelParams& model, const std::string& regime, double A) {
    DecayRun r;
    r.regime = regime;
    r.amplitude = A;
    const Grid g = c.grid();
    ScalarField M0 = shape_of(c.initial_M, g, A, c.seed);
    ScalarField rho0 = make_initial(c.initial_rho, g, 1.0, c.seed);
    add_scaled(rho0, shape_of(c.initial_M, g, 1.0, c.seed), std::max(A - 1.0, 0.0));
    for (double& v : rho0.values) v = std::max(v, 0.0);
    const State s0 = make_state(std::move(M0), std::move(rho0));
    r.initial_norm = dissipative_norm(s0);
    try {
        const auto tr = evolve(s0, model, window(c.solver, c.dissipative.t_end, c.dissipative.sample_every));
        r.steps = tr.steps;
        std::vector<double> t, v;
        for (const auto& s : tr.snapshots) {
            t.push_back(s.time);
            v.push_back(dissipative_norm(s));
            r.series.push_back({s.time, v.back()});
        }
        r.final_norm = v.back();
        if (t.size() >= 8) r.fit = fit_dissipative(t, v);
    } catch (const SolverError& e) {
        r.error = e.what();
    }
    return r;
}

json decay_record(const DecayRun& r) {
    json j{{"regime", r.regime}, {"amplitude", r.amplitude}, {"initial_norm", r.initial_norm},
           {"final_norm", r.final_norm}, {"steps", r.steps}, {"error", r.error}};
    if (r.fit) {
        j["C_fit"] = r.fit->C_fit;
        j["omega_fit"] = r.fit->omega_fit;
        j["D_fit"] = r.fit->D_fit;
        j["residual"] = r.fit->residual;
        j["flag"] = r.fit->omega_fit > 0.0 ? "dissipative" : "non-dissipative (counterexample regime)";
    }
    return j;
}

}  // namespace

ExperimentReport run_dissipative(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& cfg = c.dissipative;
    ExperimentReport rep;
    rep.study = "dissipative";

    struct Job {
        const ModelParams* model;
        std::string regime;
        double A;
    };
    const ModelParams counter = default_params(SpecKind::example1, c.model.alpha, c.model.gamma, c.model.beta);
    std::vector<Job> jobs;
    for (double A : cfg.amplitudes) jobs.push_back({&c.model, to_string(c.model.spec.kind), A});
    if (cfg.counterexample) {
        for (double A : cfg.counterexample_amplitudes) jobs.push_back({&counter, "example1", A});
    }
    const auto runs = parallel_map<DecayRun>(jobs.size(), opt.threads, [&](std::size_t i) {
        return decay_run(c, *jobs[i].model, jobs[i].regime, jobs[i].A);
    });

    std::vector<double> finals, omegas, logC, logN;
    std::vector<double> counter_omegas;
    bool failures = false;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        rep.runs.push_back(decay_record(r));
        rep.series.push_back({"norm_" + r.regime + "_A" + fmt(r.amplitude), {"t", "norm"}, {}});
        for (const auto& p : r.series) rep.series.back().rows.push_back({p[0], p[1]});
        if (!r.error.empty()) {
            failures = true;
            rep.notes.push_back("run " + r.regime + " A=" + fmt(r.amplitude) + " failed: " + r.error);
            continue;
        }
        const bool main = jobs[i].model == &c.model;
        if (main) {
            finals.push_back(r.final_norm);
            if (r.fit) {
                omegas.push_back(r.fit->omega_fit);
                if (r.fit->C_fit > 0.0) {
                    logC.push_back(std::log(r.fit->C_fit));
                    logN.push_back(std::log(r.initial_norm));
                }
            }
        } else if (r.fit) {
            counter_omegas.push_back(r.fit->omega_fit);
        }
    }

    if (logC.size() >= 2) {
        const double mx = std::accumulate(logN.begin(), logN.end(), 0.0) / logN.size();
        const double my = std::accumulate(logC.begin(), logC.end(), 0.0) / logC.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < logC.size(); ++i) {
            sxy += (logN[i] - mx) * (logC[i] - my);
            sxx += (logN[i] - mx) * (logN[i] - mx);
        }
        if (sxx > 0.0) rep.aggregate["r_inf"] = sxy / sxx;
    }

    if (cfg.t_end == 0.0) {
        rep.notes.push_back("t_end = 0: norms are the initial norms, no decay fit");
        rep.aggregate["degenerate"] = true;
        return rep;
    }
    if (failures) {
        rep.verdicts.push_back(verdict("runs_completed", false, 0, 0, "exact", "at least one run failed"));
    }
    if (!omegas.empty()) {
        const double wmin = *std::min_element(omegas.begin(), omegas.end());
        rep.aggregate["omega_min"] = wmin;
        rep.verdicts.push_back(verdict("omega_positive", wmin > cfg.omega_min, wmin, cfg.omega_min,
                                       "studies.dissipative.omega_min", "smallest fitted decay rate"));
    } else {
        rep.notes.push_back("fewer than 8 samples per run: no decay fit");
    }
    if (finals.size() >= 2) {
        const double ratio = ratio_max_min(finals);
        rep.aggregate["final_norm_ratio"] = ratio;
        rep.verdicts.push_back(verdict("absorption", ratio <= cfg.norm_ratio_tol, ratio, cfg.norm_ratio_tol,
                                       "studies.dissipative.norm_ratio_tol",
                                       "max/min of the final norms across amplitudes"));
    }
    if (!counter_omegas.empty()) {
        const double wmax = *std::max_element(counter_omegas.begin(), counter_omegas.end());
        rep.aggregate["counterexample_omega_max"] = wmax;
        rep.verdicts.push_back(verdict("counterexample_flagged", wmax <= cfg.omega_min, wmax, cfg.omega_min,
                                       "studies.dissipative.omega_min",
                                       "example1 runs must show no decay (non-dissipative regime)"));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// pair stability

ExperimentReport run_pair_stability(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& cfg = c.pair;
    ExperimentReport rep;
    rep.study = "pair";
    const Grid g = c.grid();
    const State base = initial_state(c);
    const NormWorkspace ws(g);
    const ScalarField profile = sine_profile(g);

    struct PairRun {
        double eps = 0.0;
        bool skipped = false;
        double x0 = 0.0;
        std::vector<double> times, x, L0, pairing, linf;
        double pairing_time_integral = 0.0;
        std::string error;
    };
    const auto runs = parallel_map<PairRun>(cfg.eps.size(), opt.threads, [&](std::size_t k) {
        PairRun r;
        r.eps = cfg.eps[k];
        State other = base;
        add_scaled(cfg.perturb == "M" ? other.M : other.rho, profile, r.eps);
        const DiffNorms d0 = diff_norms(ws, base.M, base.rho, other.M, other.rho, c.model.alpha);
        r.x0 = d0.x_combined;
        if (r.x0 == 0.0) {
            r.skipped = true;
            return r;
        }
        try {
            const auto pt = evolve_pair(base, other, c.model, window(c.solver, cfg.t_end, cfg.sample_every), ws);
            double sup = 0.0;
            for (std::size_t i = 0; i < pt.norms.size(); ++i) {
                const auto& n = pt.norms[i];
                const double t = pt.a.snapshots[i].time;
                sup = std::max(sup, n.x_combined / r.x0);
                r.times.push_back(t);
                r.x.push_back(n.x_combined);
                r.L0.push_back(sup);
                r.pairing.push_back(n.pairing);
                r.linf.push_back(std::max(n.linf_W, n.linf_v));
                if (i > 0) {
                    r.pairing_time_integral += 0.5 * (t - r.times[i - 1]) * (n.pairing + r.pairing[i - 1]);
                }
            }
        } catch (const SolverError& e) {
            r.error = e.what();
        }
        return r;
    });

    std::vector<const PairRun*> done;
    bool monotone = true;
    bool finite = true;
    for (const auto& r : runs) {
        json rec{{"eps", r.eps}, {"x0", r.x0}, {"skipped", r.skipped}, {"error", r.error}};
        if (r.skipped) {
            rep.notes.push_back("eps=" + fmt(r.eps) + ": zero initial difference, pair skipped");
            rep.runs.push_back(rec);
            continue;
        }
        if (!r.error.empty()) {
            rep.notes.push_back("eps=" + fmt(r.eps) + " failed: " + r.error);
            finite = false;
            rep.runs.push_back(rec);
            continue;
        }
        done.push_back(&r);
        rec["L0"] = r.L0.back();
        rec["final_ratio"] = r.x.back() / r.x0;
        rec["pairing_max"] = *std::max_element(r.pairing.begin(), r.pairing.end());
        rec["pairing_time_integral"] = r.pairing_time_integral;
        const double linf_sup = *std::max_element(r.linf.begin(), r.linf.end());
        for (double th : cfg.theta_ladder) rec["holder_ratio_" + fmt(th)] = linf_sup / std::pow(r.x0, th);
        rep.runs.push_back(rec);
        for (std::size_t i = 1; i < r.L0.size(); ++i) monotone = monotone && r.L0[i] >= r.L0[i - 1];
        for (double v : r.L0) finite = finite && std::isfinite(v);
        DatSeries s{"pair_eps" + fmt(r.eps), {"t", "x_norm", "L0", "pairing", "linf"}, {}};
        for (std::size_t i = 0; i < r.times.size(); ++i) s.rows.push_back({r.times[i], r.x[i], r.L0[i], r.pairing[i], r.linf[i]});
        rep.series.push_back(std::move(s));
    }

    if (done.empty()) {
        rep.notes.push_back("all pairs skipped");
        rep.aggregate["skipped_all"] = true;
        return rep;
    }
    rep.verdicts.push_back(verdict("ratios_finite", finite, 0, 0, "exact", "sup_s x(s)/x(0) finite for every pair"));
    rep.verdicts.push_back(verdict("ratios_monotone", monotone, 0, 0, "exact", "running supremum non-decreasing in t"));

    std::vector<double> L0s;
    for (const auto* r : done) L0s.push_back(r->L0.back());
    rep.aggregate["L0_max"] = *std::max_element(L0s.begin(), L0s.end());
    if (done.size() >= 2) {
        const double spread = ratio_max_min(L0s) - 1.0;
        rep.aggregate["L0_spread"] = spread;
        rep.verdicts.push_back(verdict("eps_stability", spread <= cfg.stability_tol, spread, cfg.stability_tol,
                                       "studies.pair.stability_tol", "max/min of L0 across eps, minus 1"));

        // largest theta whose Holder-type ratio stays bounded as eps shrinks
        const PairRun* big = done.front();
        const PairRun* small = done.front();
        for (const auto* r : done) {
            if (r->x0 > big->x0) big = r;
            if (r->x0 < small->x0) small = r;
        }
        double best = 0.0;
        const double sb = *std::max_element(big->linf.begin(), big->linf.end());
        const double ss = *std::max_element(small->linf.begin(), small->linf.end());
        for (double th : cfg.theta_ladder) {
            const double growth = (ss / std::pow(small->x0, th)) / (sb / std::pow(big->x0, th));
            if (growth <= cfg.theta_growth_tol) best = std::max(best, th);
        }
        rep.aggregate["theta_inf"] = best;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// smoothing

namespace {

// Cell-averaged squared face gradient on masked cells.
double masked_grad_sq(const ScalarField& f, const CellMask& mask) {
    const VectorField G = gradient(f);
    const Grid& g = f.grid;
    const int n0 = g.cells(0);
    const int n1 = g.cells(1);
    double s = 0.0;
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const auto c = g.index(i, j);
            if (!mask[c]) continue;
            const auto& a = G.components[0];
            const double l = a[static_cast<std::size_t>(i) * n1 + j];
            const double r = a[static_cast<std::size_t>(i + 1) * n1 + j];
            double v = 0.5 * (l * l + r * r);
            if (g.dim() == 2) {
                const auto& b = G.components[1];
                const double d = b[static_cast<std::size_t>(i) * (n1 + 1) + j];
                const double u = b[static_cast<std::size_t>(i) * (n1 + 1) + j + 1];
                v += 0.5 * (d * d + u * u);
            }
            s += v;
        }
    }
    return s * g.cell_volume();
}

struct SmoothingTerms {
    double x0 = 0.0;
    double lhs = 0.0;
    double rhs1 = 0.0;
    double y = 0.0;
    double z = 0.0;
    double C_A2 = 0.0;
    double C_A3 = 0.0;
    bool violation = false;
};

SmoothingTerms smoothing_terms(const PairTrajectory& pt, std::size_t iT, double t1, const CellMask& mask,
                               const CellMask& half_mask, double dt_snap) {
    SmoothingTerms s;
    s.x0 = pt.norms.front().x_combined;
    s.lhs = pt.norms[iT].x_combined;
    s.rhs1 = 0.5 * s.x0;

    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k <= iT; ++k) {
        if (pt.a.snapshots[k].time >= t1 - 1e-12) idx.push_back(k);
    }
    const Grid& g = mask.grid;
    const CellMask all(g, true);
    double y2 = 0.0;
    std::vector<ScalarField> Ws, vs;
    for (std::size_t m = 0; m < idx.size(); ++m) {
        const auto k = idx[m];
        const auto& a = pt.a.snapshots[k];
        const auto& b = pt.b.snapshots[k];
        ScalarField W(g, 0.0, 0.0);
        ScalarField v(g, 0.0, 0.0);
        for (std::size_t i = 0; i < W.size(); ++i) {
            W.values[i] = a.M.values[i] - b.M.values[i];
            v.values[i] = a.rho.values[i] - b.rho.values[i];
        }
        double w = 0.0;
        if (m > 0) w += 0.5 * (a.time - pt.a.snapshots[idx[m - 1]].time);
        if (m + 1 < idx.size()) w += 0.5 * (pt.a.snapshots[idx[m + 1]].time - a.time);
        const double W2 = std::pow(sublevel_l2_norm(W, mask), 2);
        const double v2 = std::pow(sublevel_l2_norm(v, mask), 2);
        y2 += w * (W2 + v2 + masked_grad_sq(v, mask) + std::pow(sublevel_l2_norm(v, all), 2));
        Ws.push_back(std::move(W));
        vs.push_back(std::move(v));
    }
    s.y = std::sqrt(y2);
    if (Ws.size() >= 2) {
        s.z = std::hypot(parabolic_z_norm(Ws, half_mask, dt_snap), parabolic_z_norm(vs, half_mask, dt_snap));
    }
    const double excess = std::max(0.0, s.lhs - s.rhs1);
    if (s.y == 0.0) {
        s.violation = excess > 0.0;
        s.C_A2 = s.violation ? inf : 0.0;
    } else {
        s.C_A2 = excess / s.y;
    }
    s.C_A3 = s.x0 > 0.0 ? s.z / s.x0 : 0.0;
    return s;
}

}  // namespace

ExperimentReport run_smoothing(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& cfg = c.smoothing;
    ExperimentReport rep;
    rep.study = "smoothing";
    const Grid g = c.grid();
    const NormWorkspace ws(g);
    const State base = initial_state(c);

    const double Tmax = *std::max_element(cfg.T.begin(), cfg.T.end());
    double Tmin_pos = inf;
    for (double T : cfg.T) {
        if (T > 0.0) Tmin_pos = std::min(Tmin_pos, T);
    }
    const double dt_snap = std::isfinite(Tmin_pos) ? Tmin_pos / cfg.snapshots : 1.0;
    const SolverConfig sc = window(c.solver, Tmax, dt_snap);

    // localized perturbations, one per delta, placed in {M0 <= delta/4} away from its edge
    std::vector<std::optional<State>> localized;
    for (double delta : cfg.deltas) {
        CellMask outside(g, false);
        for (std::size_t i = 0; i < g.size(); ++i) outside.cells[i] = base.M.values[i] <= delta / 4.0 ? 1 : 0;
        CellMask inside(g, false);
        for (std::size_t i = 0; i < g.size(); ++i) inside.cells[i] = outside.cells[i] ? 0 : 1;
        const auto dist = distance_to(inside);
        std::size_t best = g.size();
        double best_room = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!outside[i]) continue;
            const auto x = g.center(i);
            double room = std::min(dist[i], std::min(x[0], g.length(0) - x[0]));
            if (g.dim() == 2) room = std::min(room, std::min(x[1], g.length(1) - x[1]));
            if (room > best_room) {
                best_room = room;
                best = i;
            }
        }
        if (best == g.size()) {
            localized.emplace_back();
            rep.notes.push_back("delta=" + fmt(delta) + ": {M0 <= delta/4} has no interior room, localized pair skipped");
            continue;
        }
        InitialSpec bump;
        bump.kind = "bump";
        const auto ctr = g.center(best);
        bump.center = {ctr[0], ctr[1]};
        bump.radius = std::min(cfg.localized_width, best_room);
        bump.amplitude = cfg.localized_eps;
        ScalarField p = make_initial(bump, g, 0.0, 0);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!outside[i]) p.values[i] = 0.0;
        }
        State s = base;
        add_scaled(s.M, p, 1.0);
        localized.emplace_back(std::move(s));
    }

    // generic pairs: random trigonometric perturbations of both components
    std::vector<State> generic;
    for (int k = 0; k < cfg.generic_pairs; ++k) {
        InitialSpec rt;
        rt.kind = "random_trig";
        rt.amplitude = cfg.generic_eps;
        rt.modes = 6;
        State s = base;
        add_scaled(s.M, make_initial(rt, g, 0.0, c.seed + 1000 + 2 * static_cast<std::uint64_t>(k)), 1.0);
        add_scaled(s.rho, make_initial(rt, g, 0.0, c.seed + 1001 + 2 * static_cast<std::uint64_t>(k)), 1.0);
        generic.push_back(std::move(s));
    }

    struct Member {
        std::string kind;
        int index;
        const State* other;
    };
    std::vector<Member> members;
    for (std::size_t d = 0; d < localized.size(); ++d) {
        if (localized[d]) members.push_back({"localized", static_cast<int>(d), &*localized[d]});
    }
    for (std::size_t k = 0; k < generic.size(); ++k) members.push_back({"generic", static_cast<int>(k), &generic[k]});

    struct Evolved {
        std::optional<PairTrajectory> pt;
        std::string error;
    };
    const auto evolved = parallel_map<Evolved>(members.size(), opt.threads, [&](std::size_t i) {
        Evolved e;
        try {
            e.pt = evolve_pair(base, *members[i].other, c.model, sc, ws);
        } catch (const SolverError& err) {
            e.error = err.what();
        }
        return e;
    });

    bool violation = false;
    bool failures = false;
    double CA2 = 0.0;
    double CA3 = 0.0;
    std::optional<std::pair<double, double>> contraction_point;
    double best_contraction = inf;
    DatSeries scan{"contraction_scan", {"delta", "T", "lhs_over_x0"}, {}};
    for (std::size_t di = 0; di < cfg.deltas.size(); ++di) {
        const double delta = cfg.deltas[di];
        const CellMask mask = sublevel_mask(base.M, delta);
        const CellMask half = sublevel_mask(base.M, delta / 2.0);
        for (double T : cfg.T) {
            for (std::size_t m = 0; m < members.size(); ++m) {
                const auto& mem = members[m];
                if (mem.kind == "localized" && mem.index != static_cast<int>(di)) continue;
                json rec{{"delta", delta}, {"T", T}, {"kind", mem.kind}, {"index", mem.index}};
                if (!evolved[m].pt) {
                    failures = true;
                    rec["error"] = evolved[m].error;
                    rep.runs.push_back(rec);
                    continue;
                }
                const auto& pt = *evolved[m].pt;
                std::size_t iT = 0;
                for (std::size_t k = 0; k < pt.a.snapshots.size(); ++k) {
                    if (std::abs(pt.a.snapshots[k].time - T) < std::abs(pt.a.snapshots[iT].time - T)) iT = k;
                }
                const auto s = smoothing_terms(pt, iT, cfg.t1_fraction * T, mask, half, dt_snap);
                rec["x0"] = s.x0;
                rec["lhs"] = s.lhs;
                rec["rhs1"] = s.rhs1;
                rec["y_term"] = s.y;
                rec["z_term"] = s.z;
                rec["C_A2"] = s.C_A2;
                rec["C_A3"] = s.C_A3;
                rec["violation"] = s.violation;
                rep.runs.push_back(rec);
                violation = violation || s.violation;
                CA2 = std::max(CA2, s.C_A2);
                CA3 = std::max(CA3, s.C_A3);
                if (mem.kind == "localized" && s.x0 > 0.0) {
                    const double q = s.lhs / s.x0;
                    scan.rows.push_back({delta, T, q});
                    best_contraction = std::min(best_contraction, q);
                    if (!contraction_point && q <= 0.5 * (1.0 + cfg.contraction_tol)) contraction_point = {{delta, T}};
                }
            }
        }
    }
    rep.series.push_back(std::move(scan));
    rep.aggregate["C_A2_max"] = CA2;
    rep.aggregate["C_A3_max"] = CA3;
    rep.aggregate["best_localized_ratio"] = best_contraction;
    if (contraction_point) {
        rep.aggregate["contraction_delta"] = contraction_point->first;
        rep.aggregate["contraction_T"] = contraction_point->second;
    }

    if (failures) rep.verdicts.push_back(verdict("runs_completed", false, 0, 0, "exact", "at least one pair failed"));
    rep.verdicts.push_back(verdict("no_violation", !violation, violation ? 1.0 : 0.0, 0.0, "exact",
                                   "no pair with zero Y-term and x(T) > x(0)/2"));
    rep.verdicts.push_back(verdict("constants_finite", std::isfinite(CA2) && std::isfinite(CA3), std::max(CA2, CA3),
                                   inf, "exact", "ensemble maxima of C_A2 and C_A3"));
    rep.verdicts.push_back(verdict("contraction", contraction_point.has_value(), best_contraction,
                                   0.5 * (1.0 + cfg.contraction_tol), "studies.smoothing.contraction_tol",
                                   "some scanned (delta, T) has x(T)/x(0) <= (1+tol)/2 for the localized pair"));
    return rep;
}

// ---------------------------------------------------------------------------
// regularization

ExperimentReport run_regularization(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& cfg = c.regularization;
    ExperimentReport rep;
    rep.study = "regularization";
    std::set<int> ns;
    for (int n : cfg.ladder) {
        ns.insert(n);
        ns.insert(2 * n);
    }
    const std::vector<int> order(ns.begin(), ns.end());
    const State s0 = initial_state(c);
    struct Out {
        std::optional<State> final;
        std::string error;
    };
    const auto outs = parallel_map<Out>(order.size(), opt.threads, [&](std::size_t i) {
        SolverConfig sc = window(c.solver, cfg.t_end, 0.0);
        sc.reg_n = order[i];
        Out o;
        try {
            o.final = evolve(s0, c.model, sc).snapshots.back();
        } catch (const SolverError& e) {
            o.error = e.what();
        }
        return o;
    });
    auto at = [&](int n) -> const Out& {
        return outs[static_cast<std::size_t>(std::find(order.begin(), order.end(), n) - order.begin())];
    };

    std::vector<double> diffs;
    DatSeries s{"regularization", {"n", "diff_L2"}, {}};
    bool failures = false;
    for (int n : cfg.ladder) {
        const auto& a = at(n);
        const auto& b = at(2 * n);
        json rec{{"n", n}};
        if (!a.final || !b.final) {
            failures = true;
            rec["error"] = a.final ? b.error : a.error;
            rep.runs.push_back(rec);
            continue;
        }
        ScalarField d = a.final->M;
        add_scaled(d, b.final->M, -1.0);
        const double v = lp_norm(d, 2.0);
        rec["diff_L2"] = v;
        rep.runs.push_back(rec);
        diffs.push_back(v);
        s.rows.push_back({static_cast<double>(n), v});
    }
    rep.series.push_back(std::move(s));
    if (failures) rep.verdicts.push_back(verdict("runs_completed", false, 0, 0, "exact", "at least one run failed"));
    if (diffs.size() < 2) {
        rep.notes.push_back("ladder shorter than 2: no monotonicity verdict (insufficient data)");
        return rep;
    }
    bool decreasing = true;
    double order_sum = 0.0;
    int order_cnt = 0;
    for (std::size_t i = 1; i < diffs.size(); ++i) {
        decreasing = decreasing && diffs[i] < diffs[i - 1];
        if (diffs[i] > 0.0 && diffs[i - 1] > 0.0) {
            const double ratio = static_cast<double>(cfg.ladder[i]) / cfg.ladder[i - 1];
            order_sum += std::log(diffs[i - 1] / diffs[i]) / std::log(ratio);
            ++order_cnt;
        }
    }
    if (order_cnt > 0) rep.aggregate["convergence_order"] = order_sum / order_cnt;
    rep.verdicts.push_back(verdict("strictly_decreasing", decreasing, diffs.back(), diffs.front(), "exact",
                                   "|M_n - M_2n|_L2 at t_end strictly decreasing along the ladder"));
    return rep;
}

// ---------------------------------------------------------------------------
// propagation

ExperimentReport run_propagation(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& cfg = c.propagation;
    ExperimentReport rep;
    rep.study = "propagation";
    ExperimentConfig pc = c;
    pc.initial_M.amplitude = cfg.amplitude;
    const State s0 = initial_state(pc);
    const Grid g = c.grid();
    SolverConfig sc = window(c.solver, cfg.t_end, cfg.sample_every);
    sc.reg_n = cfg.reg_n;
    SolverConfig nd = sc;
    nd.nondegenerate = true;

    struct Out {
        std::optional<Trajectory> tr;
        std::optional<State> contrast;
        std::string error;
    };
    const auto outs = parallel_map<Out>(2, opt.threads, [&](std::size_t i) {
        Out o;
        try {
            if (i == 0) {
                o.tr = evolve(s0, c.model, sc);
            } else if (cfg.contrast) {
                o.contrast = step(s0, c.model, nd, stable_dt(s0, c.model, nd));
            }
        } catch (const SolverError& e) {
            o.error = e.what();
        }
        return o;
    });

    if (!outs[0].tr) {
        rep.verdicts.push_back(verdict("runs_completed", false, 0, 0, "exact", outs[0].error));
        return rep;
    }
    const Support sup0 = support_measure(s0.M, cfg.tol);
    double peak_rate = 0.0;
    DatSeries s{"support", {"t", "measure", "radius"}, {}};
    bool stays_empty = true;
    for (const auto& st : outs[0].tr->snapshots) {
        const Support sp = support_measure(st.M, cfg.tol);
        rep.runs.push_back({{"t", st.time}, {"measure", sp.measure}, {"radius", sp.radius}});
        s.rows.push_back({st.time, sp.measure, sp.radius});
        if (st.time > 0.0) peak_rate = std::max(peak_rate, (sp.radius - sup0.radius) / st.time);
        stays_empty = stays_empty && sp.measure == 0.0;
    }
    rep.series.push_back(std::move(s));
    const State& last = outs[0].tr->snapshots.back();
    const double speed = last.time > 0.0 ? (support_measure(last.M, cfg.tol).radius - sup0.radius) / last.time : 0.0;
    rep.aggregate["initial_radius"] = sup0.radius;
    rep.aggregate["front_speed"] = speed;
    rep.aggregate["peak_snapshot_rate"] = peak_rate;

    if (sup0.measure == 0.0) {
        rep.notes.push_back("M0 has empty support; contrast run not meaningful");
        rep.verdicts.push_back(verdict("support_stays_empty", stays_empty, 0, 0, "exact", "support of M stays (0, 0)"));
        return rep;
    }
    const double limit = cfg.growth_limit * sup0.radius;
    rep.verdicts.push_back(verdict("finite_front", speed < limit, speed, limit, "studies.propagation.growth_limit",
                                   "(R(t_end) - R0)/t_end against growth_limit * R0"));
    if (cfg.contrast) {
        if (!outs[1].contrast) {
            rep.verdicts.push_back(verdict("contrast_full_support", false, 0, 0, "exact", outs[1].error));
        } else {
            const Support sp = support_measure(outs[1].contrast->M, cfg.tol);
            rep.aggregate["contrast_measure"] = sp.measure;
            rep.aggregate["contrast_dt"] = outs[1].contrast->time;
            const double full = g.domain_measure();
            rep.verdicts.push_back(verdict("contrast_full_support", std::abs(sp.measure - full) <= 1e-12 * full,
                                           sp.measure, full, "studies.propagation.tol",
                                           "alpha=0 run covers every cell above tol after one step"));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// dimension

ExperimentReport run_dimension(const ExperimentConfig& c, const RunOptions& opt) {
    const auto& cfg = c.dimension;
    ExperimentReport rep;
    rep.study = "dimension";
    const State s0 = initial_state(c);
    const ModelParams counter = default_params(SpecKind::example1, c.model.alpha, c.model.gamma, c.model.beta);

    const auto expected = static_cast<long>(std::floor((cfg.t_end - cfg.transient) / cfg.sample_every + 1e-9)) + 1;
    if (expected < cfg.min_snapshots) {
        throw ConfigError("dimension study has " + std::to_string(expected) + " post-transient snapshots, needs " +
                          std::to_string(cfg.min_snapshots));
    }

    struct Out {
        std::optional<BoxCounting> box;
        std::size_t points = 0;
        double spread = 0.0;
        std::string error;
    };
    const auto outs = parallel_map<Out>(cfg.counterexample ? 2 : 1, opt.threads, [&](std::size_t i) {
        Out o;
        try {
            Trajectory tr;
            double from = cfg.transient;
            if (i == 0) {
                tr = evolve(s0, c.model, window(c.solver, cfg.t_end, cfg.sample_every));
            } else {
                State sc0 = s0;
                sc0.M = shape_of(c.initial_M, s0.M.grid, cfg.counterexample_amplitude, c.seed);
                tr = evolve(sc0, counter, window(c.solver, cfg.counterexample_t_end, cfg.sample_every));
                from = cfg.counterexample_transient;
            }
            const auto pts = feature_cloud(tr, from);
            o.points = pts.size();
            for (const auto& p : pts) {
                double d = 0.0;
                for (std::size_t k = 0; k < p.size(); ++k) d = std::max(d, std::abs(p[k] - pts.front()[k]));
                o.spread = std::max(o.spread, d);
            }
            o.box = box_counting_dimension(pts, cfg.radii);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        return o;
    });

    const char* names[] = {"main", "example1"};
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto& o = outs[i];
        json rec{{"regime", names[i]}, {"points", o.points}, {"spread", o.spread}, {"error", o.error}};
        if (o.box) {
            rec["dim"] = o.box->dim;
            rec["residual"] = o.box->residual;
            DatSeries s{std::string("box_counts_") + names[i], {"r", "N_r"}, {}};
            for (std::size_t k = 0; k < o.box->radii.size(); ++k) {
                s.rows.push_back({o.box->radii[k], static_cast<double>(o.box->counts[k])});
            }
            rep.series.push_back(std::move(s));
        }
        rep.runs.push_back(rec);
    }
    if (!outs[0].box) {
        if (outs[0].points < static_cast<std::size_t>(cfg.min_snapshots)) {
            throw ConfigError("fewer than " + std::to_string(cfg.min_snapshots) + " post-transient snapshots");
        }
        rep.verdicts.push_back(verdict("runs_completed", false, 0, 0, "exact", outs[0].error));
        return rep;
    }
    rep.aggregate["dim"] = outs[0].box->dim;
    rep.aggregate["residual"] = outs[0].box->residual;
    if (outs.size() > 1 && outs[1].box) rep.aggregate["counterexample_dim"] = outs[1].box->dim;
    if (outs.size() > 1 && !outs[1].error.empty()) rep.notes.push_back("example1 comparison failed: " + outs[1].error);
    rep.verdicts.push_back(verdict("finite_dimension",
                                   std::isfinite(outs[0].box->dim) && std::isfinite(outs[0].box->residual),
                                   outs[0].box->dim, inf, "exact", "box-counting slope and residual finite"));
    return rep;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& study_names() {
    static const std::vector<std::string> names{"dissipative", "pair", "smoothing", "regularization", "propagation",
                                                "dimension"};
    return names;
}

ExperimentReport run_study(const std::string& name, const ExperimentConfig& c, const RunOptions& opt) {
    if (name == "dissipative") return run_dissipative(c, opt);
    if (name == "pair") return run_pair_stability(c, opt);
    if (name == "smoothing") return run_smoothing(c, opt);
    if (name == "regularization") return run_regularization(c, opt);
    if (name == "propagation") return run_propagation(c, opt);
    if (name == "dimension") return run_dimension(c, opt);
    std::string all;
    for (const auto& n : study_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("unknown study '" + name + "' (valid: " + all + ")");
}

json report_json(const ExperimentReport& r, const ExperimentConfig& c, const std::string& timestamp) {
    json verdicts = json::array();
    for (const auto& v : r.verdicts) {
        verdicts.push_back({{"name", v.name},
                            {"pass", v.pass},
                            {"value", v.value},
                            {"threshold", v.threshold},
                            {"tolerance", v.tolerance},
                            {"detail", v.detail}});
    }
    json j{
        {"study", r.study},
        {"config", to_json(c)},
        {"config_hash", hex_hash(config_hash(c))},
        {"model_hash", hex_hash(fnv1a(to_json(c.model).dump()))},
        {"seed", c.seed},
        {"runs", r.runs},
        {"aggregate", r.aggregate},
        {"verdicts", verdicts},
        {"notes", r.notes},
        {"pass", r.pass()},
    };
    j["content_hash"] = hex_hash(fnv1a(j.dump()));
    j["timestamp"] = timestamp;
    return j;
}

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string csv_cell(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isnan(d)) return "nan";
        if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    }
    if (v.is_null()) return "";
    return v.dump();
}

}  // namespace

fs::path write_report(const fs::path& outdir, const ExperimentReport& r, const ExperimentConfig& c) {
    const fs::path dir = outdir / r.study;
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        out << report_json(r, c, utc_now()).dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write " + (dir / "report.json").string());
    }
    {
        std::set<std::string> keys;
        for (const auto& row : r.runs) {
            for (auto it = row.begin(); it != row.end(); ++it) keys.insert(it.key());
        }
        std::ofstream out(dir / "runs.csv");
        bool first = true;
        for (const auto& k : keys) {
            out << (first ? "" : ",") << k;
            first = false;
        }
        out << '\n';
        for (const auto& row : r.runs) {
            first = true;
            for (const auto& k : keys) {
                out << (first ? "" : ",") << (row.contains(k) ? csv_cell(row.at(k)) : "");
                first = false;
            }
            out << '\n';
        }
    }
    for (const auto& s : r.series) {
        std::ofstream out(dir / (s.name + ".dat"));
        out << '#';
        for (const auto& col : s.columns) out << ' ' << col;
        out << '\n';
        char buf[40];
        for (const auto& row : s.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.17g", row[k]);
                out << (k ? " " : "") << buf;
            }
            out << '\n';
        }
    }
    return dir;
}

}  // namespace degchemo
