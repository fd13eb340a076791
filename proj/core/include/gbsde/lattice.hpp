#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gbsde/grid.hpp"
#include "gbsde/problem.hpp"
#include "gbsde/scenario.hpp"

namespace gbsde {

/// One-step transition of the trinomial chain under a variance level v^2.
struct Transition {
    double down = 0.0;
    double mid = 0.0;
    double up = 0.0;
    double mean = 0.0;      // (b + h v^2) dt
    double variance = 0.0;  // sigma^2 v^2 dt
};

/// Recombining trinomial chain for dX = b dt + h d<B> + sigma dB rooted at
/// the problem's x0. Layer i holds nodes x0 + (k - i) dx, k = 0 .. 2i, at
/// flat offset i^2. Transition probabilities match the conditional mean and
/// variance of the increment exactly for both band-edge volatilities.
class Lattice {
public:
    std::size_t nt() const { return nt_; }
    double dt() const { return dt_; }
    double dx() const { return dx_; }
    double x_root() const { return x_root_; }
    double horizon() const { return horizon_; }
    const GCoefficients& band() const { return band_; }

    static std::size_t index(std::size_t layer, std::size_t k) { return layer * layer + k; }
    static std::size_t layer_size(std::size_t layer) { return 2 * layer + 1; }
    std::size_t node_count() const { return (nt_ + 1) * (nt_ + 1); }

    double t(std::size_t layer) const {
        return layer == nt_ ? horizon_ : static_cast<double>(layer) * dt_;
    }
    double x(std::size_t layer, std::size_t k) const {
        return x_root_ + (static_cast<double>(k) - static_cast<double>(layer)) * dx_;
    }

    /// Coefficients at decision nodes (layers 0 .. nt-1).
    double drift(std::size_t idx) const { return drift_[idx]; }
    double qv_drift(std::size_t idx) const { return qv_drift_[idx]; }
    double volatility(std::size_t idx) const { return vol_[idx]; }

    Transition transition(std::size_t idx, double v2) const;

private:
    friend Lattice build_lattice_dx(const Problem& p, std::size_t nt, double dx);

    std::size_t nt_ = 0;
    double dt_ = 0.0;
    double dx_ = 0.0;
    double x_root_ = 0.0;
    double horizon_ = 1.0;
    GCoefficients band_{1.0, 1.0};
    std::vector<double> drift_;
    std::vector<double> qv_drift_;
    std::vector<double> vol_;
};

/// Throws ConfigError naming the worst node if some transition probability
/// falls outside [0, 1].
Lattice build_lattice_dx(const Problem& p, std::size_t nt, double dx);
/// Steps aligned with a finite-difference grid (same dt and dx).
Lattice build_lattice(const Problem& p, const Grid& grid);
/// dt = T / nt, dx = (x_hi - x_lo) / (nx + 1) over the problem's domain hint.
Lattice build_lattice(const Problem& p, std::size_t nt, std::size_t nx);

struct LatticeSolution {
    double penalty = 0.0;
    std::size_t nt = 0;
    std::vector<double> y;
    std::vector<double> z;
    std::vector<double> dl;         // penalty increment n (Y~ - l)^- dt, >= 0
    std::vector<double> dk;         // Q(other level) - Q(chosen level), <= 0
    std::vector<double> chosen_v2;  // maximizing variance level (0 on the terminal layer)
    std::size_t midpoint_exceedances = 0;

    double root_y() const { return y[0]; }
    double root_z() const { return z[0]; }
    std::span<const double> layer_y(std::size_t layer) const {
        return std::span<const double>(y).subspan(Lattice::index(layer, 0), Lattice::layer_size(layer));
    }

    /// CSV "layer,node,x,Y,Z,dL,chosen_v2"; node is the signed offset k - layer.
    void write_csv(std::ostream& os, const Lattice& lat) const;
};

struct LatticeOptions {
    /// Also evaluate the one-step objective at the mid variance level and
    /// count nodes where it beats both endpoints (diagnostic only).
    bool check_midpoint = false;
};

/// Backward dynamic programming for the penalized reflected G-BSDE:
///   Q(v^2) = Y~ + dt [g(t,x,Y~,Z~) + v^2 f(t,x,Y~,Z~) + n (Y~ - l)^-],
///   Y~ = E_v[Y_next], Z~ = sigma * central difference of Y_next,
///   Y = max(Q(sigma_low^2), Q(sigma_high^2)).
/// Requires n dt <= 0.9 and dt L_y < 1 (ConfigError otherwise). Without
/// an obstacle the penalty term vanishes.
LatticeSolution solve_penalized(const Lattice& lat, const Problem& p, double n,
                                const LatticeOptions& options = {});

/// Largest penalty level the explicit lattice scheme accepts.
double max_lattice_penalty(const Lattice& lat);

/// Maximizing volatility levels of a solve, as a feedback control.
FeedbackControl feedback_control(const LatticeSolution& sol, const Lattice& lat);

struct MartingaleReport {
    double mean = 0.0;            // mean cumulative residual over paths
    double standard_error = 0.0;
    std::size_t n_paths = 0;
};

/// Simulates the chain under a volatility control and accumulates, per path,
///   r = Y_{i+1} - Y_i + dt (g + v^2 f + n (Y~ - l)^-) - Z dB.
/// The conditional mean of each increment is Q(v^2) - Y <= 0, with equality
/// under the maximizing control. Throws DomainError for out-of-band levels.
MartingaleReport reprice_under_scenario(const LatticeSolution& sol, const Lattice& lat, const Problem& p,
                                        const Control& control, std::size_t n_paths, std::uint64_t seed);

}  // namespace gbsde
