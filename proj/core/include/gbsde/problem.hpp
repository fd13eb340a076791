#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "gbsde/expr.hpp"
#include "gbsde/gcalc.hpp"

namespace gbsde {

/// User-declared structural constants. They are inputs, only spot-checked
/// by validate(); nothing in the solvers depends on them.
struct AssumptionBounds {
    double lipschitz_y = 1.0;     // L_y: Lipschitz constant of f, g in y
    double quadratic_z = 1.0;     // L_z: |f(z)-f(z')| <= L_z (1+|z|+|z'|) |z-z'|
    double data_bound = 1.0e6;    // M_0: data bound on f(.,0,0), g(.,0,0), phi
    double obstacle_bound = 1.0e6;  // N_0: upper bound of the obstacle
    double growth_exponent = 1.0;   // m: polynomial growth exponent in x
    double lipschitz_x = std::numeric_limits<double>::infinity();  // L: x-Lipschitz constant
    double sigma2_min = 0.0;      // eps: lower bound of sigma^2
    double sigma2_max = std::numeric_limits<double>::infinity();  // K: upper bound of sigma^2

    friend bool operator==(const AssumptionBounds&, const AssumptionBounds&) = default;
};

/// Truncation interval for the spatial variable and the forward start point.
struct DomainHint {
    double x_lo = -5.0;
    double x_hi = 5.0;
    double x0 = 0.0;

    friend bool operator==(const DomainHint&, const DomainHint&) = default;
};

/// Markovian (reflected) quadratic G-BSDE with forward state
///   dX = b dt + h d<B> + sigma dB,
///   -dY = g dt + f d<B> - Z dB + dK (- dA),  Y_T = phi(X_T),  Y >= l.
/// Coefficient expressions may only reference the variables listed beside
/// each member; check() enforces that.
struct Problem {
    double horizon = 1.0;
    GCoefficients band{1.0, 1.0};

    Expr drift;                       // b(t, x)
    Expr qv_drift;                    // h(t, x)
    Expr volatility = Expr::number(1.0);  // sigma(t, x)
    Expr qv_generator;                // f(t, x, y, z), integrated against d<B>
    Expr time_generator;              // g(t, x, y, z), integrated against dt
    Expr terminal;                    // phi(x)
    std::optional<Expr> obstacle;     // l(t, x)

    AssumptionBounds bounds;
    DomainHint domain;

    /// Throws ConfigError on a non-positive horizon, an empty truncation
    /// interval, or a coefficient using a variable outside its signature.
    void check() const;

    bool has_obstacle() const { return obstacle.has_value(); }

    double drift_at(double t, double x) const { return drift.eval(Env::tx(t, x)); }
    double qv_drift_at(double t, double x) const { return qv_drift.eval(Env::tx(t, x)); }
    double volatility_at(double t, double x) const { return volatility.eval(Env::tx(t, x)); }
    double qv_generator_at(double t, double x, double y, double z) const {
        return qv_generator.eval(Env::txyz(t, x, y, z));
    }
    double time_generator_at(double t, double x, double y, double z) const {
        return time_generator.eval(Env::txyz(t, x, y, z));
    }
    double terminal_at(double x) const { return terminal.eval(Env{}.bind(Var::x, x)); }
    /// -infinity when there is no obstacle.
    double obstacle_at(double t, double x) const {
        return obstacle ? obstacle->eval(Env::tx(t, x)) : -std::numeric_limits<double>::infinity();
    }
};

/// Problem file (JSON). Expression members are strings:
///   {"T": 1, "sigma_low": 0.5, "sigma_high": 1, "phi": "x^2",
///    "b": "0", "h": "0", "sigma": "1", "f": "0", "g": "0", "obstacle": "...",
///    "bounds": {"L_y", "L_z", "M_0", "N_0", "m", "L_x", "eps", "K"},
///    "domain": {"x_lo", "x_hi", "x0"}}
/// T, sigma_low, sigma_high and phi are required; unknown keys are rejected.
/// Throws ConfigError.
Problem problem_from_json(std::string_view text);
Problem load_problem(const std::filesystem::path& path);

/// Canonical JSON rendering (sorted keys, shortest round-trip numbers).
std::string problem_to_json(const Problem& p);

}  // namespace gbsde
