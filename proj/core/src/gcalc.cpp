#include "gbsde/gcalc.hpp"

#include <cmath>
#include <string>

#include "gbsde/errors.hpp"

namespace gbsde {

GCoefficients::GCoefficients(double sigma_low, double sigma_high)
    : sigma_low_(sigma_low), sigma_high_(sigma_high) {
    if (!std::isfinite(sigma_low) || !std::isfinite(sigma_high) || !(sigma_low > 0.0) ||
        !(sigma_high >= sigma_low)) {
        throw DomainError("volatility band requires 0 < sigma_low <= sigma_high, got [" +
                          std::to_string(sigma_low) + ", " + std::to_string(sigma_high) + "]");
    }
}

namespace {

void require_finite(double a) {
    if (!std::isfinite(a)) {
        throw DomainError("G-function argument must be finite");
    }
}

// v^2 a / 2, written so both G forms round identically.
double half_var_times(double var, double a) { return 0.5 * (var * a); }

}  // namespace

double g_eval(const GCoefficients& coeffs, double a) {
    require_finite(a);
    if (a >= 0.0) {
        return half_var_times(coeffs.var_high(), a);
    }
    return -half_var_times(coeffs.var_low(), -a);
}

double hjb_sup_form(const GCoefficients& coeffs, double a) {
    require_finite(a);
    double best = half_var_times(coeffs.var_low(), a);
    const double at_high = half_var_times(coeffs.var_high(), a);
    if (at_high > best) best = at_high;
    return best + 0.0;
}

double reverse_holder_threshold(double q) {
    if (!(q > 1.0) || std::isnan(q)) {
        throw DomainError("reverse Hoelder threshold requires q > 1");
    }
    if (std::isinf(q)) return 0.0;
    // (2q-1)/(2(q-1)) = 1 + 1/(2(q-1)); log1p/expm1 keep the large-q tail accurate.
    const double inner = std::log1p(0.5 / (q - 1.0)) / (q * q);
    return std::expm1(0.5 * std::log1p(inner));
}

}  // namespace gbsde
