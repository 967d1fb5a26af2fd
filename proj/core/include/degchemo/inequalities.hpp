#pragma once

namespace degchemo {

/// a^p - b^p for a, b >= 0, accurate when a and b are close.
double power_difference(double a, double b, double p);

struct InequalitySample {
    double lhs = 0.0;
    double rhs = 0.0;
    /// lhs >= rhs up to `rel_slack` times the larger magnitude.
    bool holds(double rel_slack) const;
};

/**
 * Monotonicity of the degenerate pairing:
 *   (M1^(a+1) - M2^(a+1)) (M1 - M2) >= (a+1)/(1+a/2)^2 (M1^(1+a/2) - M2^(1+a/2))^2.
 */
InequalitySample pairing_inequality(double alpha, double M1, double M2);

/**
 * Power comparison for c >= b > 0:
 *   (c/b) max(M1,M2)^(c-b) |M1^b - M2^b| >= |M1^c - M2^c|.
 */
InequalitySample power_comparison(double b, double c, double M1, double M2);

/// Same comparison with the exponent (c-b)/b on the max, which fails for b > 1.
InequalitySample power_comparison_printed(double b, double c, double M1, double M2);

}  // namespace degchemo
