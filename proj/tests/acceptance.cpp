// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "degchemo/analysis.hpp"
#include "degchemo/experiments.hpp"
#include "degchemo/inequalities.hpp"
#include "degchemo/norms.hpp"
#include "degchemo/parallel.hpp"

using namespace degchemo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool verdict_ok(const ExperimentReport& r, const std::string& name, Outcome& o) {
    const Verdict* v = r.find(name);
    if (!v) {
        o.require(false, name + " missing");
        return false;
    }
    o.require(v->pass, name + " value=" + fmt(v->value) + " threshold=" + fmt(v->threshold));
    return v->pass;
}

ScalarField sine(int n) {
    return sample(make_grid_1d(1.0, n), [](double x, double) { return std::sin(pi * x); });
}

Outcome inequalities() {
    Outcome o;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> M(0.0, 100.0);
    std::uniform_real_distribution<double> A(0.0, 6.0);
    int bad_pair = 0, bad_cmp = 0;
    for (int k = 0; k < 10000; ++k) {
        double alpha = A(rng);
        if (alpha == 0.0) alpha = 6.0;
        if (!pairing_inequality(alpha, M(rng), M(rng)).holds(1e-12)) ++bad_pair;
        const double b = std::max(1e-3, A(rng));
        const double c = b + A(rng);
        if (!power_comparison(b, c, M(rng), M(rng)).holds(1e-12)) ++bad_cmp;
    }
    o.require(bad_pair == 0, std::to_string(bad_pair) + " pairing failures");
    o.require(bad_cmp == 0, std::to_string(bad_cmp) + " power comparison failures");
    o.detail = o.detail.empty() ? "10^4 samples each, 0 failures" : o.detail;
    return o;
}

Outcome hminus1() {
    Outcome o;
    const double exact = 1.0 / (pi * std::sqrt(2.0));
    const NormWorkspace ws256(make_grid_1d(1.0, 256));
    const double v = hminus1_norm(ws256, sine(256));
    o.require(std::abs(v - exact) <= 1e-3, "sine norm " + fmt(v));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (const Grid& g : {make_grid_1d(1.0, 256), make_grid_2d(1.0, 1.0, 48, 48)}) {
        const NormWorkspace ws(g);
        ScalarField w(g, 0.0);
        for (double& x : w.values) x = u(rng);
        const ScalarField phi = ws.solve_poisson(w);
        ScalarField prod = w;
        for (std::size_t i = 0; i < w.size(); ++i) prod.values[i] *= phi.values[i];
        const double lhs = std::pow(face_l2_norm(gradient(phi)), 2);
        worst = std::max(worst, std::abs(lhs - integrate(prod)) / lhs);
    }
    o.require(worst <= 1e-10, "duality rel error " + fmt(worst));

    std::vector<double> err;
    for (int n : {64, 128, 256}) err.push_back(std::abs(hminus1_norm(NormWorkspace(make_grid_1d(1.0, n)), sine(n)) - exact));
    const double p1 = std::log2(err[0] / err[1]);
    const double p2 = std::log2(err[1] / err[2]);
    o.require(p1 >= 1.9 && p2 >= 1.9, "orders " + fmt(p1) + ", " + fmt(p2));
    if (o.pass) o.detail = "norm=" + fmt(v) + " duality=" + fmt(worst) + " orders " + fmt(p1) + ", " + fmt(p2);
    return o;
}

Outcome positivity() {
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ModelParams params = default_params();
    int negatives = 0, failures = 0;
    for (int k = 0; k < 1000; ++k) {
        const bool two_d = k % 10 == 9;
        const Grid g = two_d ? make_grid_2d(1.0, 1.0, 10, 10) : make_grid_1d(1.0, 24);
        InitialSpec m;
        m.kind = k % 3 == 0 ? "bump" : "random_trig";
        m.amplitude = 2.0 * u(rng);
        m.center = {u(rng), u(rng)};
        m.radius = 0.05 + 0.3 * u(rng);
        m.modes = 1 + static_cast<int>(6 * u(rng));
        InitialSpec r;
        r.kind = "random_trig";
        r.offset = u(rng);
        r.amplitude = 2.0 * u(rng);
        r.modes = 1 + static_cast<int>(6 * u(rng));
        const State s0 = make_state(make_initial(m, g, 0.0, rng()), make_initial(r, g, r.offset, rng()));
        SolverConfig c;
        c.t_end = 0.02;
        c.snapshot_every = 0.005;
        c.implicit_diffusion = k % 2 == 1;
        try {
            for (const State& s : evolve(s0, params, c).snapshots) {
                for (double v : s.M.values) negatives += v < 0.0;
                for (double v : s.rho.values) negatives += v < 0.0;
            }
        } catch (const SolverError&) {
            ++failures;
        }
    }
    o.require(negatives == 0, std::to_string(negatives) + " negative values");
    o.require(failures == 0, std::to_string(failures) + " solver failures");

    const Grid g = make_grid_1d(1.0, 64);
    SolverConfig c;
    const State z = make_state(ScalarField(g, 0.0), sine(64));
    bool zero = true;
    for (const State& s : evolve(z, params, c).snapshots) {
        for (double v : s.M.values) zero = zero && v == 0.0;
    }
    o.require(zero, "M0 = 0 left zero");
    if (o.pass) o.detail = "10^3 random ICs nonnegative at every snapshot, M0=0 invariant";
    return o;
}

ExperimentConfig defaults() { return parse_config(json::object()); }

Outcome dissipative() {
    Outcome o;
    const auto r = run_dissipative(defaults(), {default_threads()});
    verdict_ok(r, "omega_positive", o);
    verdict_ok(r, "absorption", o);
    verdict_ok(r, "counterexample_flagged", o);
    o.require(r.find("runs_completed") == nullptr, "a run failed");
    if (o.pass) {
        o.detail = "omega_min=" + fmt(r.find("omega_positive")->value) + " norm ratio=" +
                   fmt(r.find("absorption")->value) + " example1 omega_max=" + fmt(r.find("counterexample_flagged")->value);
    }
    return o;
}

Outcome pair() {
    Outcome o;
    const auto r = run_pair_stability(defaults(), {default_threads()});
    verdict_ok(r, "ratios_finite", o);
    verdict_ok(r, "ratios_monotone", o);
    verdict_ok(r, "eps_stability", o);
    if (o.pass) o.detail = "relative spread across eps=" + fmt(r.find("eps_stability")->value);
    return o;
}

Outcome smoothing() {
    Outcome o;
    const auto r = run_smoothing(defaults(), {default_threads()});
    verdict_ok(r, "no_violation", o);
    verdict_ok(r, "constants_finite", o);
    verdict_ok(r, "contraction", o);
    o.require(r.find("runs_completed") == nullptr, "a pair failed");
    if (o.pass) {
        o.detail = "best localized x(T)/x(0)=" + fmt(r.find("contraction")->value) + " C_A2=" +
                   fmt(r.aggregate.at("C_A2_max").get<double>()) + " C_A3=" + fmt(r.aggregate.at("C_A3_max").get<double>());
    }
    return o;
}

Outcome propagation() {
    Outcome o;
    const auto r = run_propagation(defaults(), {default_threads()});
    verdict_ok(r, "finite_front", o);
    verdict_ok(r, "contrast_full_support", o);
    if (o.pass) o.detail = "front speed / R0 = " + fmt(r.find("finite_front")->value) + " per unit time";
    return o;
}

Outcome regularization() {
    Outcome o;
    const auto r = run_regularization(defaults(), {default_threads()});
    verdict_ok(r, "strictly_decreasing", o);
    if (o.pass) o.detail = "diff(n=10)=" + fmt(r.find("strictly_decreasing")->threshold) + " diff(n=80)=" +
                           fmt(r.find("strictly_decreasing")->value);
    return o;
}

Outcome levelsets() {
    Outcome o;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const int modes = 1 + k % 6;
        std::vector<double> a(modes);
        for (double& x : a) x = 2.0 * u(rng) - 1.0;
        const ScalarField M0 = sample(make_grid_1d(1.0, 128), [&](double x, double) {
            double s = 0.0;
            for (int m = 0; m < modes; ++m) s += a[m] * std::sin((m + 1) * pi * x);
            return std::abs(s);
        });
        const double top = lp_norm(M0, inf);
        if (top == 0.0) continue;
        const double theta = 0.2 + 0.8 * u(rng);
        if (!levelset_distance(M0, (0.05 + 0.5 * u(rng)) * top, theta).holds()) ++violations;
    }
    o.require(violations == 0, std::to_string(violations) + " level-set bound violations");

    const ScalarField lin = sample(make_grid_1d(1.0, 256), [](double x, double) { return x; });
    const auto c = build_cutoff(lin, 0.25, 0.5, 0.5);
    bool exact = true;
    for (std::size_t i = 0; i < lin.size(); ++i) {
        if (lin.values[i] <= 0.25) exact = exact && c.phi.values[i] == 0.0;
        if (lin.values[i] > 0.5) exact = exact && c.phi.values[i] == 1.0;
    }
    o.require(exact && c.lower_plateau && c.upper_plateau, "plateaus not exact");
    o.require(std::isfinite(c.C_phi), "C_phi not finite");
    if (o.pass) o.detail = "10^2 profiles within one spacing, plateaus exact, C_phi(0.5)=" + fmt(c.C_phi);
    return o;
}

Outcome dimension() {
    Outcome o;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> seg, sq;
    for (int i = 0; i < 10000; ++i) {
        seg.push_back({u(rng), 0.5});
        sq.push_back({u(rng), u(rng)});
    }
    const std::vector<double> rs{0.01, 0.02, 0.04, 0.08, 0.16};
    const std::vector<double> rq{0.02, 0.04, 0.08, 0.16, 0.32};
    const double d1 = box_counting_dimension(seg, rs).dim;
    const double d2 = box_counting_dimension(sq, rq).dim;
    const double d0 = box_counting_dimension(std::vector<std::vector<double>>(50, {0.2, 0.2}), rs).dim;
    o.require(std::abs(d1 - 1.0) <= 0.15, "segment " + fmt(d1));
    o.require(std::abs(d2 - 2.0) <= 0.2, "square " + fmt(d2));
    o.require(d0 == 0.0, "point " + fmt(d0));
    const auto r = run_dimension(defaults(), {default_threads()});
    const Verdict* v = r.find("finite_dimension");
    const double ds = v ? v->value : inf;
    o.require(v && v->pass && std::abs(ds) <= 0.1, "steady-state cloud " + fmt(ds));
    if (o.pass) o.detail = "segment=" + fmt(d1) + " square=" + fmt(d2) + " point=0 steady=" + fmt(ds);
    return o;
}

std::string report_without_timestamp(const fs::path& p) {
    std::ifstream in(p);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.find("\"timestamp\"") == std::string::npos) out += line + '\n';
    }
    return out;
}

Outcome determinism() {
    Outcome o;
    const auto root = fs::temp_directory_path() / "degchemo_acceptance_determinism";
    fs::remove_all(root);
    json doc = json::object();
    apply_override(doc, "studies.smoothing.generic_pairs=6");
    const auto c = parse_config(doc);
    for (const std::string study : {"pair", "smoothing", "propagation"}) {
        const auto a = write_report(root / "a", run_study(study, c, {1}), c);
        const auto b = write_report(root / "b", run_study(study, c, {default_threads() + 1}), c);
        const std::string ra = report_without_timestamp(a / "report.json");
        o.require(!ra.empty() && ra == report_without_timestamp(b / "report.json"), study + " report differs");
        std::ifstream ca(a / "runs.csv"), cb(b / "runs.csv");
        std::stringstream sa, sb;
        sa << ca.rdbuf();
        sb << cb.rdbuf();
        o.require(sa.str() == sb.str(), study + " runs.csv differs");
    }
    fs::remove_all(root);
    if (o.pass) o.detail = "pair, smoothing, propagation reports byte-identical apart from timestamp";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"algebraic inequalities", inequalities},
        {"H^-1 machinery", hminus1},
        {"positivity and invariance", positivity},
        {"dissipativity", dissipative},
        {"Lipschitz stability", pair},
        {"smoothing structure", smoothing},
        {"finite propagation", propagation},
        {"regularization ladder", regularization},
        {"cutoff and level sets", levelsets},
        {"dimension estimator", dimension},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("criterion %2zu %-27s %s  (%.1fs) %s\n", k + 1, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                    secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
