#include "degchemo/config.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "degchemo/hash.hpp"

namespace degchemo {

using nlohmann::json;

namespace {

json initial_json(const InitialSpec& s) {
    return json{{"kind", s.kind},         {"offset", s.offset}, {"amplitude", s.amplitude},
                {"center", s.center},     {"radius", s.radius}, {"power", s.power},
                {"modes", s.modes}};
}

InitialSpec initial_from(const json& j) {
    InitialSpec s;
    s.kind = j.at("kind").get<std::string>();
    s.offset = j.at("offset").get<double>();
    s.amplitude = j.at("amplitude").get<double>();
    const auto c = j.at("center").get<std::vector<double>>();
    if (c.empty() || c.size() > 2) throw ConfigError("initial center needs 1 or 2 coordinates");
    s.center = {c[0], c.size() > 1 ? c[1] : 0.5};
    s.radius = j.at("radius").get<double>();
    s.power = j.at("power").get<double>();
    s.modes = j.at("modes").get<int>();
    static const char* kinds[] = {"zero", "constant", "bump", "plateau", "sine", "random_trig"};
    if (std::find(std::begin(kinds), std::end(kinds), s.kind) == std::end(kinds)) {
        throw ConfigError("unknown initial kind '" + s.kind + "'");
    }
    if (!(s.radius > 0.0)) throw ConfigError("initial radius must be positive");
    if (!(s.power > 0.0)) throw ConfigError("initial power must be positive");
    if (s.modes < 1) throw ConfigError("initial modes must be >= 1");
    if (s.offset < 0.0 || (s.kind != "zero" && s.kind != "constant" && s.amplitude < 0.0)) {
        throw ConfigError("initial data must be nonnegative (offset, amplitude >= 0)");
    }
    return s;
}

json studies_json(const ExperimentConfig& c) {
    const auto& d = c.dissipative;
    const auto& p = c.pair;
    const auto& s = c.smoothing;
    const auto& r = c.regularization;
    const auto& g = c.propagation;
    const auto& m = c.dimension;
    return json{
        {"dissipative",
         {{"amplitudes", d.amplitudes}, {"t_end", d.t_end}, {"sample_every", d.sample_every},
          {"norm_ratio_tol", d.norm_ratio_tol}, {"omega_min", d.omega_min}, {"counterexample", d.counterexample},
          {"counterexample_amplitudes", d.counterexample_amplitudes}}},
        {"pair",
         {{"eps", p.eps}, {"perturb", p.perturb}, {"t_end", p.t_end}, {"sample_every", p.sample_every},
          {"theta_ladder", p.theta_ladder}, {"stability_tol", p.stability_tol},
          {"theta_growth_tol", p.theta_growth_tol}}},
        {"smoothing",
         {{"deltas", s.deltas}, {"T", s.T}, {"t1_fraction", s.t1_fraction}, {"snapshots", s.snapshots},
          {"localized_eps", s.localized_eps}, {"localized_width", s.localized_width},
          {"generic_pairs", s.generic_pairs}, {"generic_eps", s.generic_eps},
          {"contraction_tol", s.contraction_tol}}},
        {"regularization", {{"ladder", r.ladder}, {"t_end", r.t_end}}},
        {"propagation",
         {{"t_end", g.t_end}, {"sample_every", g.sample_every}, {"tol", g.tol}, {"growth_limit", g.growth_limit},
          {"reg_n", g.reg_n}, {"contrast", g.contrast}, {"amplitude", g.amplitude}}},
        {"dimension",
         {{"t_end", m.t_end}, {"transient", m.transient}, {"sample_every", m.sample_every}, {"radii", m.radii},
          {"min_snapshots", m.min_snapshots}, {"counterexample", m.counterexample},
          {"counterexample_t_end", m.counterexample_t_end},
          {"counterexample_transient", m.counterexample_transient},
          {"counterexample_amplitude", m.counterexample_amplitude}}},
    };
}

void reject_unknown(const json& user, const json& defaults, const std::string& path) {
    if (!user.is_object()) {
        throw ConfigError((path.empty() ? std::string("config") : path) + " must be a JSON object");
    }
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!defaults.contains(it.key())) throw ConfigError("unknown key '" + key + "'");
        if (key == "model") continue;
        const auto& d = defaults.at(it.key());
        if (d.is_object()) reject_unknown(it.value(), d, key);
    }
}

void positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

Grid ExperimentConfig::grid() const {
    return make_grid(dim, std::span<const double>(lengths.data(), 2), std::span<const int>(cells.data(), 2));
}

json default_config_json() {
    ExperimentConfig c;
    c.initial_rho.kind = "constant";
    c.initial_rho.offset = 1.0;
    json doc = to_json(c);
    doc["model"].erase("constants");
    return doc;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty path segment");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a non-object");
        node = &(*node)[parts[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("override path '" + path + "' crosses a non-object");
    (*node)[parts.back()] = value;
}

ExperimentConfig parse_config(const json& user) {
    const json defaults = default_config_json();
    reject_unknown(user, defaults, "");
    json doc = defaults;
    doc.merge_patch(user);
    ExperimentConfig c;
    try {
        c.model = model_from_json(doc.at("model"));
        if (!(c.model.alpha > 0.0)) throw ConfigError("model.alpha must be positive");

        const auto& g = doc.at("grid");
        c.dim = g.at("dim").get<int>();
        const auto lengths = g.at("lengths").get<std::vector<double>>();
        const auto cells = g.at("cells").get<std::vector<int>>();
        if (c.dim != 1 && c.dim != 2) throw ConfigError("unsupported dimension " + std::to_string(c.dim));
        if (lengths.size() < static_cast<std::size_t>(c.dim) || cells.size() < static_cast<std::size_t>(c.dim)) {
            throw ConfigError("grid needs one length and one cell count per axis");
        }
        for (int k = 0; k < c.dim; ++k) {
            c.lengths[k] = lengths[k];
            c.cells[k] = cells[k];
        }
        (void)c.grid();

        c.solver = solver_config_from_json(doc.at("solver"));
        c.initial_M = initial_from(doc.at("initial").at("M"));
        c.initial_rho = initial_from(doc.at("initial").at("rho"));
        c.seed = doc.at("seed").get<std::uint64_t>();

        const auto& st = doc.at("studies");
        {
            const auto& j = st.at("dissipative");
            auto& d = c.dissipative;
            d.amplitudes = j.at("amplitudes").get<std::vector<double>>();
            d.t_end = j.at("t_end").get<double>();
            d.sample_every = j.at("sample_every").get<double>();
            d.norm_ratio_tol = j.at("norm_ratio_tol").get<double>();
            d.omega_min = j.at("omega_min").get<double>();
            d.counterexample = j.at("counterexample").get<bool>();
            d.counterexample_amplitudes = j.at("counterexample_amplitudes").get<std::vector<double>>();
            if (d.amplitudes.empty()) throw ConfigError("studies.dissipative.amplitudes is empty");
            for (double a : d.amplitudes) positive(a, "studies.dissipative.amplitudes entries");
            for (double a : d.counterexample_amplitudes) positive(a, "studies.dissipative.counterexample_amplitudes entries");
            if (d.t_end < 0.0) throw ConfigError("studies.dissipative.t_end must be >= 0");
            positive(d.sample_every, "studies.dissipative.sample_every");
            positive(d.norm_ratio_tol, "studies.dissipative.norm_ratio_tol");
        }
        {
            const auto& j = st.at("pair");
            auto& p = c.pair;
            p.eps = j.at("eps").get<std::vector<double>>();
            p.perturb = j.at("perturb").get<std::string>();
            p.t_end = j.at("t_end").get<double>();
            p.sample_every = j.at("sample_every").get<double>();
            p.theta_ladder = j.at("theta_ladder").get<std::vector<double>>();
            p.stability_tol = j.at("stability_tol").get<double>();
            p.theta_growth_tol = j.at("theta_growth_tol").get<double>();
            if (p.perturb != "M" && p.perturb != "rho") throw ConfigError("studies.pair.perturb must be \"M\" or \"rho\"");
            for (double e : p.eps) {
                if (!(e >= 0.0)) throw ConfigError("studies.pair.eps entries must be >= 0");
            }
            for (double t : p.theta_ladder) {
                if (!(t > 0.0 && t <= 1.0)) throw ConfigError("studies.pair.theta_ladder entries must lie in (0, 1]");
            }
            if (p.t_end < 0.0) throw ConfigError("studies.pair.t_end must be >= 0");
            positive(p.sample_every, "studies.pair.sample_every");
            positive(p.stability_tol, "studies.pair.stability_tol");
            positive(p.theta_growth_tol, "studies.pair.theta_growth_tol");
        }
        {
            const auto& j = st.at("smoothing");
            auto& s = c.smoothing;
            s.deltas = j.at("deltas").get<std::vector<double>>();
            s.T = j.at("T").get<std::vector<double>>();
            s.t1_fraction = j.at("t1_fraction").get<double>();
            s.snapshots = j.at("snapshots").get<int>();
            s.localized_eps = j.at("localized_eps").get<double>();
            s.localized_width = j.at("localized_width").get<double>();
            s.generic_pairs = j.at("generic_pairs").get<int>();
            s.generic_eps = j.at("generic_eps").get<double>();
            s.contraction_tol = j.at("contraction_tol").get<double>();
            if (s.deltas.empty() || s.T.empty()) throw ConfigError("studies.smoothing needs deltas and T");
            for (double d : s.deltas) positive(d, "studies.smoothing.deltas entries");
            for (double t : s.T) {
                if (!(t >= 0.0)) throw ConfigError("studies.smoothing.T entries must be >= 0");
            }
            if (!(s.t1_fraction >= 0.0 && s.t1_fraction <= 1.0)) throw ConfigError("studies.smoothing.t1_fraction must lie in [0, 1]");
            if (s.snapshots < 2) throw ConfigError("studies.smoothing.snapshots must be >= 2");
            if (s.generic_pairs < 0) throw ConfigError("studies.smoothing.generic_pairs must be >= 0");
            positive(s.localized_eps, "studies.smoothing.localized_eps");
            positive(s.localized_width, "studies.smoothing.localized_width");
            positive(s.generic_eps, "studies.smoothing.generic_eps");
            if (!(s.contraction_tol >= 0.0)) throw ConfigError("studies.smoothing.contraction_tol must be >= 0");
        }
        {
            const auto& j = st.at("regularization");
            c.regularization.ladder = j.at("ladder").get<std::vector<int>>();
            c.regularization.t_end = j.at("t_end").get<double>();
            if (c.regularization.ladder.empty()) throw ConfigError("studies.regularization.ladder is empty");
            for (int n : c.regularization.ladder) {
                if (n < 1) throw ConfigError("studies.regularization.ladder entries must be >= 1");
            }
            if (c.regularization.t_end < 0.0) throw ConfigError("studies.regularization.t_end must be >= 0");
        }
        {
            const auto& j = st.at("propagation");
            auto& g2 = c.propagation;
            g2.t_end = j.at("t_end").get<double>();
            g2.sample_every = j.at("sample_every").get<double>();
            g2.tol = j.at("tol").get<double>();
            g2.growth_limit = j.at("growth_limit").get<double>();
            g2.reg_n = j.at("reg_n").get<int>();
            g2.contrast = j.at("contrast").get<bool>();
            g2.amplitude = j.at("amplitude").get<double>();
            if (!(g2.amplitude >= 0.0)) throw ConfigError("studies.propagation.amplitude must be >= 0");
            positive(g2.t_end, "studies.propagation.t_end");
            positive(g2.sample_every, "studies.propagation.sample_every");
            positive(g2.tol, "studies.propagation.tol");
            positive(g2.growth_limit, "studies.propagation.growth_limit");
            if (g2.reg_n < 1) throw ConfigError("studies.propagation.reg_n must be >= 1");
        }
        {
            const auto& j = st.at("dimension");
            auto& m = c.dimension;
            m.t_end = j.at("t_end").get<double>();
            m.transient = j.at("transient").get<double>();
            m.sample_every = j.at("sample_every").get<double>();
            m.radii = j.at("radii").get<std::vector<double>>();
            m.min_snapshots = j.at("min_snapshots").get<int>();
            m.counterexample = j.at("counterexample").get<bool>();
            m.counterexample_t_end = j.at("counterexample_t_end").get<double>();
            m.counterexample_transient = j.at("counterexample_transient").get<double>();
            m.counterexample_amplitude = j.at("counterexample_amplitude").get<double>();
            positive(m.t_end, "studies.dimension.t_end");
            positive(m.sample_every, "studies.dimension.sample_every");
            if (!(m.transient >= 0.0 && m.transient < m.t_end)) throw ConfigError("studies.dimension.transient must lie in [0, t_end)");
            if (m.min_snapshots < 10) throw ConfigError("studies.dimension.min_snapshots must be >= 10");
            for (double r : m.radii) positive(r, "studies.dimension.radii entries");
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

json to_json(const ExperimentConfig& c) {
    json lengths = json::array();
    json cells = json::array();
    for (int k = 0; k < c.dim; ++k) {
        lengths.push_back(c.lengths[k]);
        cells.push_back(c.cells[k]);
    }
    return json{
        {"model", to_json(c.model)},
        {"grid", {{"dim", c.dim}, {"lengths", lengths}, {"cells", cells}}},
        {"solver", to_json(c.solver)},
        {"initial", {{"M", initial_json(c.initial_M)}, {"rho", initial_json(c.initial_rho)}}},
        {"seed", c.seed},
        {"studies", studies_json(c)},
    };
}

std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(to_json(c).dump()); }

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

ScalarField make_initial(const InitialSpec& s, const Grid& grid, double boundary, std::uint64_t seed) {
    const double pi = std::numbers::pi;
    std::vector<double> coef;
    if (s.kind == "random_trig") {
        std::mt19937_64 rng(seed);
        double total = 0.0;
        for (int m = 0; m < s.modes; ++m) {
            coef.push_back(2.0 * unit_uniform(rng()) - 1.0);
            total += std::abs(coef.back());
        }
        if (total > 0.0) {
            for (double& a : coef) a /= total;
        }
    }
    const int dim = grid.dim();
    return sample(
        grid,
        [&](double x, double y) {
            const double p[2] = {x, y};
            double r2 = 0.0;
            for (int k = 0; k < dim; ++k) r2 += (p[k] - s.center[k]) * (p[k] - s.center[k]);
            if (s.kind == "zero") return 0.0;
            if (s.kind == "constant") return s.offset;
            if (s.kind == "bump") {
                const double q = 1.0 - r2 / (s.radius * s.radius);
                return s.offset + (q > 0.0 ? s.amplitude * std::pow(q, s.power) : 0.0);
            }
            if (s.kind == "plateau") return s.offset + (r2 < s.radius * s.radius ? s.amplitude : 0.0);
            auto mode = [&](int m) {
                double v = 1.0;
                for (int k = 0; k < dim; ++k) v *= std::sin(m * pi * p[k] / grid.length(k));
                return v;
            };
            if (s.kind == "sine") return s.offset + s.amplitude * std::max(0.0, mode(1));
            double acc = 0.0;
            for (int m = 0; m < s.modes; ++m) acc += coef[m] * mode(m + 1);
            return s.offset + s.amplitude * std::abs(acc);
        },
        boundary);
}

State initial_state(const ExperimentConfig& c) {
    const Grid g = c.grid();
    return make_state(make_initial(c.initial_M, g, 0.0, c.seed), make_initial(c.initial_rho, g, 1.0, c.seed ^ 0x9e3779b97f4a7c15ull));
}

}  // namespace degchemo
