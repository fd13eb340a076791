#pragma once

#include "gbsde/grid.hpp"
#include "gbsde/problem.hpp"

namespace gbsde {

// Explicit monotone finite differences for
//   u_t + F(u_xx, u_x, u, x, t) = 0,  u(T, .) = phi,
//   F = G(sigma^2 A + 2 f(t,x,y,sigma p) + 2 h p) + b p + g(t,x,y,sigma p),
// marched backward from T. Second derivatives are central, the b p term is
// upwinded on the sign of b, and every other first derivative is central.
// Boundary nodes take the same explicit step with zero second derivative
// and an inward one-sided first derivative.

/// F(d2u, du, u, x, t), one-dimensional.
double hamiltonian(const Problem& p, double t, double x, double u, double du, double d2u);

/// Throws DivergenceError (with the layer index) on a non-finite value;
/// coefficient EvalErrors propagate. The grid must satisfy the CFL
/// condition for p (enforced again here).
Field solve_terminal(const Problem& p, const Grid& grid);

/// Obstacle problem min(-u_t - F, u - l) = 0 by projecting every new layer
/// onto u >= l. Requires an obstacle.
Field solve_obstacle_projection(const Problem& p, const Grid& grid);

/// Penalized problem u_t + F + n (u - l)^- = 0. Each grid step is split
/// into ceil(n dt / cfl_safety) substeps so the explicit reaction term stays
/// monotone; the returned field holds the grid layers only. n = 0 reproduces
/// solve_terminal. Requires an obstacle when n > 0.
Field solve_obstacle_penalized(const Problem& p, const Grid& grid, double n);

/// Z = sigma(t, x) u_x with central differences (one-sided at the ends).
Field gradient_field(const Problem& p, const Field& u);

}  // namespace gbsde
