#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace degchemo {

/// Which reaction pair (f, g) the model uses.
enum class SpecKind {
    example2_corrected,  ///< f = M - M^b/(M^b+1) atan(rho), g = rho + M rho/(rho+1)
    example2_printed,    ///< f = -M + M^b/(M^b+1) atan(rho), same g; sign kept for comparison
    example1,            ///< f = -M, g = 0: pure growth, the infinite-dimensional regime
    custom,              ///< user-supplied evaluators, not serializable
};

std::string to_string(SpecKind kind);
SpecKind spec_kind_from_string(const std::string& name);

/// Nonlinearities. Custom specs supply all four handles; built-ins ignore them.
struct NonlinearitySpec {
    SpecKind kind = SpecKind::example2_corrected;
    std::function<double(double, double)> f;        // f(M, rho)
    std::function<double(double, double)> g;        // g(M, rho)
    std::function<double(double, double)> f_tilde;  // f~(s, rho), s = M^beta
    std::function<double(double)> g2;               // g2(rho)
};

/**
 * Exponents and structural constants of the reaction terms.
 *
 * f is expected to split as F5 M + f~(M^beta, rho) and g as G1 rho + g2(rho) M;
 * validate_assumptions() checks those identities by sampling.
 */
struct ModelParams {
    double alpha = 4.0;
    double gamma = 3.5;
    double beta = 3.2;
    double F1 = 0.0;
    double F2 = 0.0;
    double F3 = 0.0;
    double F4 = 0.0;  // coefficient of the older splitting; carried but unused
    double F5 = 0.0;
    double G1 = 0.0;
    double G2 = 0.0;
    double xi = 0.0;
    NonlinearitySpec spec;
};

/// Parameters with the default constants for `kind` filled in.
ModelParams default_params(SpecKind kind = SpecKind::example2_corrected,
                           double alpha = 4.0, double gamma = 3.5, double beta = 3.2);

struct CheckResult {
    std::string name;
    bool pass = false;
    /// Worst margin found; positive means satisfied with room to spare.
    double slack = 0.0;
    std::string detail;
    std::optional<std::pair<double, double>> witness;  // (M, rho) at the worst margin
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    const CheckResult* find(const std::string& name) const;
};

ValidationReport validate_balance(double alpha, double gamma, double beta);

/// 2 min{(2 min{gamma,beta} - 2 - alpha)/(alpha + 2), gamma} without any validation.
double kappa_formula(double alpha, double gamma, double beta);
/// Throws InvalidArgument unless the balance conditions hold.
double kappa(const ModelParams& params);

double eval_f(const ModelParams& params, double M, double rho);
double eval_g(const ModelParams& params, double M, double rho);
/// f~(s, rho) of the F5 splitting, as defined by the spec kind.
double eval_f_tilde(const ModelParams& params, double s, double rho);
double eval_g2(const ModelParams& params, double rho);

/**
 * Sweep (M, rho) over {0} plus a log-spaced grid of (0, 1e3], `sample_count`
 * points per axis, and report the worst margin of every structural assumption.
 * Check names: "growth_bound", "xi_range", "coercivity", "g_decomposition",
 * "g2_bound", "f_zero", "g2_zero", "f_decomposition", "F5_positive", "beta_balance".
 */
ValidationReport validate_assumptions(const ModelParams& params, int sample_count = 100);

nlohmann::json to_json(const ModelParams& params);
/// Accepts {alpha, gamma, beta, spec, constants:{...}}; unknown keys are rejected.
ModelParams model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValidationReport& report);

}  // namespace degchemo
