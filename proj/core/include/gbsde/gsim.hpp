#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gbsde/expr.hpp"
#include "gbsde/grid.hpp"
#include "gbsde/problem.hpp"
#include "gbsde/scenario.hpp"

namespace gbsde {

/// Simulated paths of (B, <B>, X), each of nt + 1 points, path-major.
struct PathBundle {
    std::size_t n_paths = 0;
    std::size_t nt = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> b;
    std::vector<double> qv;
    std::vector<double> x;

    std::size_t offset(std::size_t path, std::size_t step) const { return path * (nt + 1) + step; }

    /// CSV "path,step,t,B,QV,X".
    void write_csv(std::ostream& os) const;
};

/// Euler-Maruyama under a volatility control v(t, x):
///   dB ~ N(0, v^2 dt), d<B> = v^2 dt, dX = b dt + h d<B> + sigma dB,
/// started from the problem's x0. Bit-identical for identical inputs.
PathBundle sample_paths(const Problem& p, const Control& control, std::size_t n_paths, std::size_t nt,
                        std::uint64_t seed);

/// Every step satisfies sigma_low^2 dt <= d<B> <= sigma_high^2 dt.
bool qv_band_holds(const PathBundle& paths, const GCoefficients& band);

struct UpperExpectationEstimate {
    double estimate = 0.0;  // largest scenario mean
    double standard_error = 0.0;
    std::size_t argmax = 0;  // index into the scenario list
    std::vector<double> means;
    std::vector<double> standard_errors;
};

/// max over scenarios of the Monte Carlo mean of payoff(X_T). A lower
/// bound for the G-expectation: only a finite sub-family of measures is
/// searched. Every scenario reuses the same random numbers.
UpperExpectationEstimate estimate_upper_expectation(const Expr& payoff, const Problem& p,
                                                    std::span<const Control> scenarios, std::size_t n_paths,
                                                    std::size_t nt, std::uint64_t seed);

struct ExpMartingaleResult {
    double mean = 0.0;
    double standard_error = 0.0;
    double max_exponent = 0.0;  // largest log E_T seen on any path
    bool diverged = false;      // some path overflowed; mean is not meaningful
};

/// Monte Carlo mean of exp(int Z dB - 1/2 int Z^2 d<B>) at T under one
/// control, with Z read from z_field by bilinear interpolation.
ExpMartingaleResult exp_martingale_check(const Field& z_field, const Problem& p, const Control& control,
                                         std::size_t n_paths, std::size_t nt, std::uint64_t seed);

/// Heuristic BMO size: max over scenarios and deterministic grid times tau
/// of the mean of int_tau^T Z^2 d<B>. Deterministic times only, so a lower
/// bound on the supremum over stopping times.
double bmo_estimate(const Field& z_field, const Problem& p, std::span<const Control> scenarios,
                    std::size_t n_paths, std::size_t nt, std::uint64_t seed);

}  // namespace gbsde
