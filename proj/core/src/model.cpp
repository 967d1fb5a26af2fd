#include "degchemo/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "degchemo/grid.hpp"

namespace degchemo {

std::string to_string(SpecKind kind) {
    switch (kind) {
        case SpecKind::example2_corrected: return "example2_corrected";
        case SpecKind::example2_printed: return "example2_printed";
        case SpecKind::example1: return "example1";
        case SpecKind::custom: return "custom";
    }
    return "unknown";
}

SpecKind spec_kind_from_string(const std::string& name) {
    if (name == "example2_corrected") return SpecKind::example2_corrected;
    if (name == "example2_printed") return SpecKind::example2_printed;
    if (name == "example1") return SpecKind::example1;
    throw InvalidArgument("unknown nonlinearity spec '" + name + "'");
}

ModelParams default_params(SpecKind kind, double alpha, double gamma, double beta) {
    ModelParams p;
    p.alpha = alpha;
    p.gamma = gamma;
    p.beta = beta;
    p.spec.kind = kind;
    constexpr double half_pi = std::numbers::pi / 2.0;
    switch (kind) {
        case SpecKind::example2_corrected:
        case SpecKind::example2_printed:
        case SpecKind::custom:
            p.F1 = 1.0 + half_pi;
            p.xi = 2.0;
            p.F2 = 0.5;
            p.F3 = half_pi;
            p.F5 = 1.0;
            p.G1 = 1.0;
            p.G2 = 1.0;
            break;
        case SpecKind::example1:
            // f = -M is exactly F5 M with F5 = -1; g vanishes identically.
            p.F1 = 1.0;
            p.xi = 2.0;
            p.F2 = 0.5;
            p.F3 = 0.0;
            p.F5 = -1.0;
            p.G1 = 0.0;
            p.G2 = 0.0;
            break;
    }
    return p;
}

bool ValidationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

ValidationReport validate_balance(double alpha, double gamma, double beta) {
    ValidationReport r;
    auto add = [&](std::string name, double slack, std::string detail) {
        r.checks.push_back({std::move(name), slack > 0.0, slack, std::move(detail), std::nullopt});
    };
    add("alpha_positive", alpha, "alpha > 0");
    add("gamma_lower", gamma - (1.0 + alpha / 2.0), "1 + alpha/2 < gamma");
    add("gamma_upper", alpha - gamma, "gamma < alpha");
    add("beta_lower", beta - (1.0 + alpha / 2.0), "beta > 1 + alpha/2");
    return r;
}

double kappa_formula(double alpha, double gamma, double beta) {
    const double ratio = (2.0 * std::min(gamma, beta) - 2.0 - alpha) / (alpha + 2.0);
    return 2.0 * std::min(ratio, gamma);
}

double kappa(const ModelParams& params) {
    const auto report = validate_balance(params.alpha, params.gamma, params.beta);
    if (!report.all_pass()) {
        throw InvalidArgument("kappa requires the balance conditions 1 + alpha/2 < gamma < alpha, beta > 1 + alpha/2");
    }
    return kappa_formula(params.alpha, params.gamma, params.beta);
}

namespace {

void require_nonnegative(double M, double rho) {
    if (!(M >= 0.0) || !(rho >= 0.0)) {
        throw InvalidArgument("nonlinearities are defined for M, rho >= 0");
    }
}

double saturation(double s) { return s / (s + 1.0); }

}  // namespace

double eval_f(const ModelParams& params, double M, double rho) {
    require_nonnegative(M, rho);
    switch (params.spec.kind) {
        case SpecKind::example2_corrected:
            return M - saturation(std::pow(M, params.beta)) * std::atan(rho);
        case SpecKind::example2_printed:
            return -M + saturation(std::pow(M, params.beta)) * std::atan(rho);
        case SpecKind::example1:
            return -M;
        case SpecKind::custom:
            if (!params.spec.f) throw InvalidArgument("custom spec without f");
            return params.spec.f(M, rho);
    }
    return 0.0;
}

double eval_g(const ModelParams& params, double M, double rho) {
    require_nonnegative(M, rho);
    switch (params.spec.kind) {
        case SpecKind::example2_corrected:
        case SpecKind::example2_printed:
            return rho + M * rho / (rho + 1.0);
        case SpecKind::example1:
            return 0.0;
        case SpecKind::custom:
            if (!params.spec.g) throw InvalidArgument("custom spec without g");
            return params.spec.g(M, rho);
    }
    return 0.0;
}

double eval_f_tilde(const ModelParams& params, double s, double rho) {
    switch (params.spec.kind) {
        case SpecKind::example2_corrected:
            return -saturation(s) * std::atan(rho);
        case SpecKind::example2_printed:
            return saturation(s) * std::atan(rho);
        case SpecKind::example1:
            return 0.0;
        case SpecKind::custom:
            if (!params.spec.f_tilde) throw InvalidArgument("custom spec without f_tilde");
            return params.spec.f_tilde(s, rho);
    }
    return 0.0;
}

double eval_g2(const ModelParams& params, double rho) {
    switch (params.spec.kind) {
        case SpecKind::example2_corrected:
        case SpecKind::example2_printed:
            return rho / (rho + 1.0);
        case SpecKind::example1:
            return 0.0;
        case SpecKind::custom:
            if (!params.spec.g2) throw InvalidArgument("custom spec without g2");
            return params.spec.g2(rho);
    }
    return 0.0;
}

namespace {

// Tracks the smallest margin seen together with its witness.
struct WorstMargin {
    double margin = std::numeric_limits<double>::infinity();
    std::pair<double, double> at{0.0, 0.0};
    void update(double m, double M, double rho) {
        if (m < margin || std::isnan(m)) {
            margin = m;
            at = {M, rho};
        }
    }
};

CheckResult make_check(std::string name, const WorstMargin& w, bool pass, std::string detail) {
    return {std::move(name), pass, w.margin, std::move(detail), w.at};
}

}  // namespace

ValidationReport validate_assumptions(const ModelParams& params, int sample_count) {
    if (sample_count < 100) throw InvalidArgument("validate_assumptions needs sample_count >= 100");

    std::vector<double> axis;
    axis.reserve(sample_count);
    axis.push_back(0.0);
    const int nlog = sample_count - 1;
    const double lo = -4.0;
    const double hi = 3.0;
    for (int i = 0; i < nlog; ++i) {
        axis.push_back(std::pow(10.0, lo + (hi - lo) * i / (nlog - 1)));
    }

    WorstMargin growth, coercive, gdec, g2b, fzero, fdec;
    bool gdec_ok = true;
    bool fdec_ok = true;
    for (double rho : axis) {
        const double g2 = eval_g2(params, rho);
        g2b.update(params.G2 - std::abs(g2), 0.0, rho);
        const double f0 = eval_f(params, 0.0, rho);
        fzero.update(-std::abs(f0), 0.0, rho);
        for (double M : axis) {
            const double f = eval_f(params, M, rho);
            const double g = eval_g(params, M, rho);
            growth.update(params.F1 * std::sqrt(1.0 + std::pow(M, params.xi)) - std::abs(f), M, rho);
            coercive.update(f - (params.F2 * M - params.F3), M, rho);

            const double gres = std::abs(g - (params.G1 * rho + g2 * M));
            gdec.update(-gres, M, rho);
            if (!(gres <= 1e-12 * (1.0 + std::abs(g)))) gdec_ok = false;

            const double fres =
                std::abs(f - (params.F5 * M + eval_f_tilde(params, std::pow(M, params.beta), rho)));
            fdec.update(-fres, M, rho);
            if (!(fres <= 1e-12 * (1.0 + std::abs(f)))) fdec_ok = false;
        }
    }

    ValidationReport r;
    r.checks.push_back(make_check("growth_bound", growth, growth.margin >= 0.0,
                                  "|f(M,rho)| <= F1 (1 + M^xi)^(1/2)"));
    {
        const double upper = params.alpha - params.gamma + 2.0;
        const double slack = std::min(params.xi, upper - params.xi);
        r.checks.push_back({"xi_range", params.xi >= 0.0 && params.xi < upper, slack,
                            "0 <= xi < alpha - gamma + 2", std::nullopt});
    }
    r.checks.push_back(make_check("coercivity", coercive, coercive.margin >= 0.0 && params.F2 > 0.0,
                                  "f(M,rho) >= F2 M - F3 with F2 > 0"));
    r.checks.push_back(make_check("g_decomposition", gdec, gdec_ok, "g(M,rho) = G1 rho + g2(rho) M"));
    r.checks.push_back(make_check("g2_bound", g2b, g2b.margin >= 0.0, "|g2(rho)| <= G2"));
    r.checks.push_back(make_check("f_zero", fzero, fzero.margin >= -1e-14, "f(0,rho) = 0"));
    {
        const double g20 = eval_g2(params, 0.0);
        r.checks.push_back({"g2_zero", g20 <= 0.0, -g20, "g2(0) <= 0", std::pair{0.0, 0.0}});
    }
    r.checks.push_back(make_check("f_decomposition", fdec, fdec_ok, "f(M,rho) = F5 M + f~(M^beta, rho)"));
    r.checks.push_back({"F5_positive", params.F5 > 0.0, params.F5, "F5 > 0", std::nullopt});
    {
        const double slack = params.beta - (1.0 + params.alpha / 2.0);
        r.checks.push_back({"beta_balance", slack > 0.0, slack, "beta > 1 + alpha/2", std::nullopt});
    }
    return r;
}

nlohmann::json to_json(const ModelParams& p) {
    return nlohmann::json{
        {"alpha", p.alpha},
        {"gamma", p.gamma},
        {"beta", p.beta},
        {"spec", to_string(p.spec.kind)},
        {"constants",
         {{"F1", p.F1}, {"F2", p.F2}, {"F3", p.F3}, {"F4", p.F4}, {"F5", p.F5},
          {"G1", p.G1}, {"G2", p.G2}, {"xi", p.xi}}},
    };
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw InvalidArgument("unknown key '" + it.key() + "' in " + where);
    }
}

double number_at(const nlohmann::json& j, const char* key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw InvalidArgument(std::string(key) + " in " + where + " must be a number");
    return v.get<double>();
}

}  // namespace

ModelParams model_from_json(const nlohmann::json& j) {
    reject_unknown(j, {"alpha", "gamma", "beta", "spec", "constants"}, "model");
    try {
        const SpecKind kind = spec_kind_from_string(j.value("spec", std::string("example2_corrected")));
        ModelParams p = default_params(kind);
        if (j.contains("alpha")) p.alpha = number_at(j, "alpha", "model");
        if (j.contains("gamma")) p.gamma = number_at(j, "gamma", "model");
        if (j.contains("beta")) p.beta = number_at(j, "beta", "model");
        if (j.contains("constants")) {
            const auto& c = j.at("constants");
            reject_unknown(c, {"F1", "F2", "F3", "F4", "F5", "G1", "G2", "xi"}, "model.constants");
            auto read = [&](const char* key, double& dst) {
                if (c.contains(key)) dst = number_at(c, key, "model.constants");
            };
            read("F1", p.F1);
            read("F2", p.F2);
            read("F3", p.F3);
            read("F4", p.F4);
            read("F5", p.F5);
            read("G1", p.G1);
            read("G2", p.G2);
            read("xi", p.xi);
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad model config: ") + e.what());
    }
}

nlohmann::json to_json(const ValidationReport& report) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json e{{"name", c.name}, {"pass", c.pass}, {"slack", c.slack}, {"detail", c.detail}};
        if (c.witness) e["witness"] = {{"M", c.witness->first}, {"rho", c.witness->second}};
        arr.push_back(std::move(e));
    }
    return nlohmann::json{{"checks", arr}, {"all_pass", report.all_pass()}};
}

}  // namespace degchemo
