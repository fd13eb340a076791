#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gbsde/gcalc.hpp"

namespace gbsde {

/// Piecewise-constant volatility path: levels[k] applies on
/// [breakpoints[k], breakpoints[k+1]). One member of the representation
/// family of the G-expectation.
class Scenario {
public:
    /// breakpoints strictly increasing from 0 to the horizon,
    /// levels.size() == breakpoints.size() - 1, all levels positive.
    /// Throws DomainError otherwise.
    Scenario(std::vector<double> breakpoints, std::vector<double> levels);

    static Scenario constant(double level, double horizon);

    double level_at(double t) const;
    double horizon() const { return breakpoints_.back(); }
    std::span<const double> breakpoints() const { return breakpoints_; }
    std::span<const double> levels() const { return levels_; }

private:
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
};

/// State-dependent volatility read off a trinomial lattice (for example the
/// maximizing levels of a lattice solve). Layer i has nodes
/// x_root + (k - i) dx, k = 0 .. 2i, stored at offset i^2.
class FeedbackControl {
public:
    FeedbackControl(std::size_t nt, double dt, double x_root, double dx, std::vector<double> levels);

    /// Level at the nearest lattice node; times past the last decision
    /// layer use that layer.
    double level_at(double t, double x) const;
    double level_at_node(std::size_t layer, std::size_t k) const { return levels_[layer * layer + k]; }

    std::size_t nt() const { return nt_; }
    std::span<const double> levels() const { return levels_; }

private:
    std::size_t nt_;
    double dt_;
    double x_root_;
    double dx_;
    std::vector<double> levels_;
};

using Control = std::variant<Scenario, FeedbackControl>;

double control_level(const Control& c, double t, double x);

/// Throws DomainError if any level of c lies outside [sigma_low, sigma_high].
void require_in_band(const Control& c, const GCoefficients& band);

std::string describe(const Control& c);

}  // namespace gbsde
