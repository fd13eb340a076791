#include "gbsde/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gbsde/errors.hpp"
#include "gbsde/gcalc.hpp"
#include "gbsde/parallel.hpp"

namespace gbsde {

namespace {

enum class ObstacleMode { none, projection, penalty };

// F with the drift term's derivative supplied separately so the march can
// upwind it while everything inside G and the z-argument stay central.
double hamiltonian_split(const Problem& p, double t, double x, double u, double du_drift,
                         double du_central, double d2u) {
    const double sigma = p.volatility_at(t, x);
    const double z = sigma * du_central;
    const double inside = sigma * d2u * sigma + 2.0 * p.qv_generator_at(t, x, u, z) +
                          2.0 * p.qv_drift_at(t, x) * du_central;
    return g_eval(p.band, inside) + p.drift_at(t, x) * du_drift + p.time_generator_at(t, x, u, z);
}

Field march(const Problem& p, const Grid& grid, ObstacleMode mode, double penalty) {
    grid.require_cfl(p);
    if (mode != ObstacleMode::none && !p.has_obstacle()) {
        throw ConfigError("obstacle solve requested for a problem without obstacle");
    }
    const std::size_t nodes = grid.nodes();
    const double dx = grid.dx();
    const double inv_dx2 = 1.0 / (dx * dx);

    std::size_t substeps = 1;
    if (mode == ObstacleMode::penalty && penalty > 0.0) {
        substeps = static_cast<std::size_t>(std::ceil(penalty * grid.dt() / grid.cfl_safety()));
        substeps = std::max<std::size_t>(substeps, 1);
    }
    const double h = grid.dt() / static_cast<double>(substeps);

    Field u(grid);
    std::vector<double> cur(nodes);
    std::vector<double> next(nodes);
    const double t_end = grid.horizon();
    for (std::size_t j = 0; j < nodes; ++j) {
        cur[j] = p.terminal_at(grid.x(j));
        if (mode == ObstacleMode::projection) cur[j] = std::max(cur[j], p.obstacle_at(t_end, grid.x(j)));
    }
    std::copy(cur.begin(), cur.end(), u.layer(grid.nt()).begin());

    for (std::size_t layer = grid.nt(); layer-- > 0;) {
        const double t_upper = grid.t(layer + 1);
        for (std::size_t s = 0; s < substeps; ++s) {
            const double t_known = t_upper - static_cast<double>(s) * h;
            const double t_new = s + 1 == substeps ? grid.t(layer) : t_known - h;
            parallel_for(0, nodes, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t j = lo; j < hi; ++j) {
                    const double x = grid.x(j);
                    const double u0 = cur[j];
                    double rate;
                    if (j == 0 || j + 1 == nodes) {
                        // Zero curvature, inward one-sided slope.
                        const double slope = j == 0 ? (cur[1] - u0) / dx : (u0 - cur[j - 1]) / dx;
                        rate = hamiltonian_split(p, t_known, x, u0, slope, slope, 0.0);
                    } else {
                        const double um = cur[j - 1];
                        const double up = cur[j + 1];
                        const double d2u = (up - 2.0 * u0 + um) * inv_dx2;
                        const double central = (up - um) / (2.0 * dx);
                        const double upwind =
                            p.drift_at(t_known, x) >= 0.0 ? (up - u0) / dx : (u0 - um) / dx;
                        rate = hamiltonian_split(p, t_known, x, u0, upwind, central, d2u);
                    }
                    if (mode == ObstacleMode::penalty && penalty > 0.0) {
                        rate += penalty * std::max(p.obstacle_at(t_known, x) - u0, 0.0);
                    }
                    next[j] = u0 + h * rate;
                }
            });
            if (mode == ObstacleMode::projection) {
                for (std::size_t j = 0; j < nodes; ++j) {
                    next[j] = std::max(next[j], p.obstacle_at(t_new, grid.x(j)));
                }
            }
            cur.swap(next);
        }
        for (std::size_t j = 0; j < nodes; ++j) {
            if (!std::isfinite(cur[j])) {
                throw DivergenceError("finite-difference solve diverged at layer " + std::to_string(layer) +
                                          ", node " + std::to_string(j),
                                      layer);
            }
        }
        std::copy(cur.begin(), cur.end(), u.layer(layer).begin());
    }
    return u;
}

}  // namespace

double hamiltonian(const Problem& p, double t, double x, double u, double du, double d2u) {
    return hamiltonian_split(p, t, x, u, du, du, d2u);
}

Field solve_terminal(const Problem& p, const Grid& grid) { return march(p, grid, ObstacleMode::none, 0.0); }

Field solve_obstacle_projection(const Problem& p, const Grid& grid) {
    return march(p, grid, ObstacleMode::projection, 0.0);
}

Field solve_obstacle_penalized(const Problem& p, const Grid& grid, double n) {
    if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("penalty level must be finite and >= 0");
    if (n == 0.0) return march(p, grid, ObstacleMode::none, 0.0);
    return march(p, grid, ObstacleMode::penalty, n);
}

Field gradient_field(const Problem& p, const Field& u) {
    const Grid& g = u.grid();
    Field z(g);
    const std::size_t last = g.nodes() - 1;
    for (std::size_t i = 0; i <= g.nt(); ++i) {
        const double t = g.t(i);
        for (std::size_t j = 0; j <= last; ++j) {
            double du;
            if (j == 0) {
                du = (u.at(i, 1) - u.at(i, 0)) / g.dx();
            } else if (j == last) {
                du = (u.at(i, last) - u.at(i, last - 1)) / g.dx();
            } else {
                du = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.dx());
            }
            z.at(i, j) = p.volatility_at(t, g.x(j)) * du;
        }
    }
    return z;
}

}  // namespace gbsde
