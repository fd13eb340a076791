#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gbsde/grid.hpp"
#include "gbsde/problem.hpp"
#include "gbsde/scenario.hpp"

namespace gbsde {

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
};

/// Machine-readable outcome of one experiment:
///   {"experiment", "config_hash", "assertions": [{"name","pass","value","bound"}]}
struct Summary {
    std::string experiment;
    std::string config_hash;
    std::vector<Assertion> assertions;

    bool passed() const;
    const Assertion* find(const std::string& name) const;
    std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Penalization sweep

struct PenaltyRow {
    std::string solver;  // "lattice" or "pde"
    double n = 0.0;
    double max_deficit = 0.0;      // max over nodes of (Y^n - l)^-
    double max_step_change = 0.0;  // max |Y^n - Y^{previous n}|, NaN on the first row
    double max_abs_y = 0.0;
    std::size_t monotonicity_violations = 0;  // nodes with Y^n < Y^{previous n}
    double wall_seconds = 0.0;     // console only; kept out of the CSV
};

struct PenaltyReport {
    std::vector<PenaltyRow> rows;  // per solver, n increasing
    Summary summary;

    /// CSV "solver,n,max_deficit,max_step_change,max_abs_y,monotonicity_violations".
    void write_csv(std::ostream& os) const;
};

/// Runs the lattice and finite-difference penalized solvers for every n
/// (strictly increasing) on one grid and checks: no node decreases as n
/// grows, the deficit (Y^n - l)^- is nonincreasing and ends below 1e-2,
/// successive changes shrink by >= 1.5x over the last three doublings, and
/// max |Y^n| varies by < 5%. Requires an obstacle; the lattice needs
/// n_max * dt <= 0.9.
PenaltyReport run_penalty_sweep(const Problem& p, const GridSpec& grid, std::span<const double> n_list);

// ---------------------------------------------------------------------------
// Comparison

struct ComparisonRow {
    std::size_t pair = 0;
    std::string solver;
    bool ordered_data = true;  // sampled data satisfy phi1>=phi2, f1>=f2, g1>=g2, l1>=l2
    std::size_t violations = 0;  // nodes with Y1 < Y2
    double min_gap = 0.0;        // min over nodes of Y1 - Y2
    double max_gap = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    Summary summary;

    /// CSV "pair,solver,ordered_data,violations,min_gap,max_gap".
    void write_csv(std::ostream& os) const;
};

/// Solves each (larger, smaller) pair with both solvers on a shared grid and
/// counts node-wise ordering violations. Obstacle problems use projection
/// (finite differences) and the largest admissible penalty (lattice).
ComparisonReport run_comparison_suite(std::span<const std::pair<Problem, Problem>> pairs, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Feynman-Kac cross-check

struct McConfig {
    std::vector<Control> scenarios;
    std::size_t n_paths = 100000;
    std::size_t nt = 100;
    std::uint64_t seed = 0;
    std::size_t repricing_paths = 20000;
};

struct CrosscheckReport {
    double pde_value = 0.0;      // u(0, x0)
    double lattice_value = 0.0;  // Y at the lattice root
    double lattice_z = 0.0;
    double pde_z = 0.0;
    std::optional<double> mc_estimate;  // scenario supremum (f = g = 0, no obstacle)
    std::optional<double> mc_standard_error;
    std::optional<std::size_t> mc_argmax;
    std::optional<double> bmo;  // heuristic, reported only
    std::vector<std::pair<std::string, std::pair<double, double>>> residuals;  // control -> (mean, SE)
    Summary summary;

    /// CSV "quantity,value".
    void write_csv(std::ostream& os) const;
};

/// Computes the finite-difference value, the lattice value at matched
/// resolution, and (when f = g = 0 and there is no obstacle) the scenario
/// Monte Carlo lower bound; also reprices the lattice solution under each
/// scenario and under its own maximizing control.
CrosscheckReport run_feynman_kac_crosscheck(const Problem& p, const GridSpec& grid, const McConfig& mc,
                                            double agreement_tol = 5e-3);

// ---------------------------------------------------------------------------
// Stability

struct StabilityReport {
    double delta = 0.0;
    double gap_full = 0.0;  // sup |u(phi + delta) - u(phi)|
    double gap_half = 0.0;  // sup |u(phi + delta/2) - u(phi)|
    double ratio = 0.0;     // gap_full / gap_half, NaN when gap_half == 0
    Summary summary;

    /// CSV "delta,gap_full,gap_half,ratio".
    void write_csv(std::ostream& os) const;
};

/// Perturbs the terminal condition by delta and delta/2 and checks the
/// solution gap scales linearly (ratio in [1.5, 2.5]); delta = 0 must give
/// a zero gap.
StabilityReport run_stability(const Problem& p, double delta, const GridSpec& grid);

/// Canonical string of a grid spec, used in configuration hashes.
std::string describe(const GridSpec& grid);

}  // namespace gbsde
