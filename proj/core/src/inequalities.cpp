#include "degchemo/inequalities.hpp"

#include <algorithm>
#include <cmath>

#include "degchemo/grid.hpp"

namespace degchemo {

double power_difference(double a, double b, double p) {
    if (!(a >= 0.0) || !(b >= 0.0)) throw InvalidArgument("power_difference needs a, b >= 0");
    if (a == b) return 0.0;
    if (a < b) return -power_difference(b, a, p);
    if (b == 0.0) return std::pow(a, p);
    return std::pow(b, p) * std::expm1(p * std::log1p((a - b) / b));
}

bool InequalitySample::holds(double rel_slack) const {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return lhs >= rhs - rel_slack * scale;
}

InequalitySample pairing_inequality(double alpha, double M1, double M2) {
    const double half = 1.0 + alpha / 2.0;
    const double d = power_difference(M1, M2, half);
    return {power_difference(M1, M2, alpha + 1.0) * (M1 - M2), (alpha + 1.0) / (half * half) * d * d};
}

InequalitySample power_comparison(double b, double c, double M1, double M2) {
    if (!(b > 0.0) || c < b) throw InvalidArgument("power_comparison needs c >= b > 0");
    const double m = std::max(M1, M2);
    return {c / b * std::pow(m, c - b) * std::abs(power_difference(M1, M2, b)),
            std::abs(power_difference(M1, M2, c))};
}

InequalitySample power_comparison_printed(double b, double c, double M1, double M2) {
    if (!(b > 0.0) || c < b) throw InvalidArgument("power_comparison needs c >= b > 0");
    const double m = std::max(M1, M2);
    return {c / b * std::pow(m, (c - b) / b) * std::abs(power_difference(M1, M2, b)),
            std::abs(power_difference(M1, M2, c))};
}

}  // namespace degchemo
