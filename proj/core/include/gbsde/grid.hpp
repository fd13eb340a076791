#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gbsde/problem.hpp"

namespace gbsde {

struct GridSpec {
    std::size_t nx = 399;  // interior nodes; nx + 2 nodes including the two boundary nodes
    std::size_t nt = 400;  // time steps
    std::optional<double> x_lo;  // defaults to the problem's domain hint
    std::optional<double> x_hi;
    double cfl_safety = 0.9;     // in (0, 0.9]
};

/// Uniform space-time grid on [0, T] x [x_lo, x_hi]. Node j sits at
/// x_lo + j dx for j = 0 .. nx + 1; layer i at t = i dt for i = 0 .. nt.
class Grid {
public:
    /// Grid for explicit marching of p; throws ConfigError when
    ///   dt * (sigma_high^2 sup sigma^2 / dx^2 + (|b| + sigma_high^2 |h|) / dx) > cfl_safety
    /// anywhere on the grid, or when nx < 3, nt < 1, or cfl_safety is outside (0, 0.9].
    Grid(const Problem& p, const GridSpec& spec);

    /// Plain geometry without a stability requirement (e.g. for diagnostic fields).
    Grid(double x_lo, double x_hi, std::size_t nx, std::size_t nt, double horizon);

    /// Throws ConfigError if this grid is too coarse in time for p.
    void require_cfl(const Problem& p) const;
    /// Left-hand side of the stability condition for p (must be <= cfl_safety).
    double cfl_number(const Problem& p) const;

    std::size_t nx() const { return nx_; }
    std::size_t nt() const { return nt_; }
    std::size_t nodes() const { return nx_ + 2; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double horizon() const { return horizon_; }
    double dx() const { return dx_; }
    double dt() const { return dt_; }
    double cfl_safety() const { return cfl_safety_; }

    double x(std::size_t j) const { return x_lo_ + static_cast<double>(j) * dx_; }
    double t(std::size_t i) const { return i == nt_ ? horizon_ : static_cast<double>(i) * dt_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double x_lo_;
    double x_hi_;
    std::size_t nx_;
    std::size_t nt_;
    double horizon_;
    double dx_;
    double dt_;
    double cfl_safety_ = 0.9;
};

/// Space-time array u(t_i, x_j), time-outer.
class Field {
public:
    explicit Field(Grid grid, double fill = 0.0);

    const Grid& grid() const { return grid_; }

    double at(std::size_t layer, std::size_t node) const { return values_[layer * stride_ + node]; }
    double& at(std::size_t layer, std::size_t node) { return values_[layer * stride_ + node]; }
    std::span<const double> layer(std::size_t i) const { return {values_.data() + i * stride_, stride_}; }
    std::span<double> layer(std::size_t i) { return {values_.data() + i * stride_, stride_}; }
    std::span<const double> values() const { return values_; }

    /// Linear interpolation in x within a layer, clamped to [x_lo, x_hi].
    double interpolate(std::size_t layer, double x) const;
    /// Bilinear interpolation in (t, x), clamped to the grid.
    double interpolate(double t, double x) const;

    bool all_finite() const;

    /// CSV "t,x,u", time-outer, 17 significant digits.
    void write_csv(std::ostream& os) const;

private:
    Grid grid_;
    std::size_t stride_;
    std::vector<double> values_;
};

/// Largest |a - b| over all nodes of two fields on the same grid.
double max_abs_difference(const Field& a, const Field& b);

}  // namespace gbsde
