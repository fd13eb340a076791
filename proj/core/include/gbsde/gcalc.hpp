#pragma once

namespace gbsde {

/// Volatility band [sigma_low, sigma_high] of a one-dimensional
/// G-Brownian motion. The band is also the scenario interval: every
/// constant volatility v in the band is a representative measure.
class GCoefficients {
public:
    /// Throws DomainError unless 0 < sigma_low <= sigma_high (both finite).
    GCoefficients(double sigma_low, double sigma_high);

    double sigma_low() const noexcept { return sigma_low_; }
    double sigma_high() const noexcept { return sigma_high_; }
    double var_low() const noexcept { return sigma_low_ * sigma_low_; }
    double var_high() const noexcept { return sigma_high_ * sigma_high_; }

    bool degenerate() const noexcept { return sigma_low_ == sigma_high_; }
    bool contains(double v, double tol = 0.0) const noexcept {
        return v >= sigma_low_ - tol && v <= sigma_high_ + tol;
    }

    friend bool operator==(const GCoefficients&, const GCoefficients&) = default;

private:
    double sigma_low_;
    double sigma_high_;
};

/// G(a) = 1/2 (sigma_high^2 a^+ - sigma_low^2 a^-).
double g_eval(const GCoefficients& coeffs, double a);

/// sup over v in [sigma_low, sigma_high] of v^2 a / 2. The objective is
/// linear in v^2, so only the two band edges are compared.
double hjb_sup_form(const GCoefficients& coeffs, double a);

/// Threshold phi(q) = sqrt(1 + log((2q-1)/(2(q-1))) / q^2) - 1 below which a
/// BMO norm guarantees the reverse Hoelder inequality with exponent q.
/// Requires q > 1.
double reverse_holder_threshold(double q);

}  // namespace gbsde
