#include "gbsde/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"
#include "gbsde/parallel.hpp"
#include "gbsde/rng.hpp"

namespace gbsde {

namespace {

constexpr double kPenaltyCap = 0.9;  // n * dt

Transition make_transition(double drift, double qv_drift, double vol, double v2, double dt, double dx) {
    Transition tr;
    tr.mean = (drift + qv_drift * v2) * dt;
    tr.variance = vol * vol * v2 * dt;
    const double second = (tr.variance + tr.mean * tr.mean) / (dx * dx);
    const double first = tr.mean / dx;
    tr.up = 0.5 * (second + first);
    tr.down = 0.5 * (second - first);
    tr.mid = 1.0 - second;
    return tr;
}

}  // namespace

Transition Lattice::transition(std::size_t idx, double v2) const {
    return make_transition(drift_[idx], qv_drift_[idx], vol_[idx], v2, dt_, dx_);
}

Lattice build_lattice_dx(const Problem& p, std::size_t nt, double dx) {
    if (nt < 1) throw ConfigError("lattice requires nt >= 1");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ConfigError("lattice requires dx > 0");
    Lattice lat;
    lat.nt_ = nt;
    lat.horizon_ = p.horizon;
    lat.dt_ = p.horizon / static_cast<double>(nt);
    lat.dx_ = dx;
    lat.x_root_ = p.domain.x0;
    lat.band_ = p.band;
    const std::size_t decision_nodes = nt * nt;
    lat.drift_.resize(decision_nodes);
    lat.qv_drift_.resize(decision_nodes);
    lat.vol_.resize(decision_nodes);

    double worst_p = std::numeric_limits<double>::infinity();
    std::size_t worst_layer = 0;
    std::size_t worst_k = 0;
    double worst_v = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = lat.t(i);
        for (std::size_t k = 0; k < Lattice::layer_size(i); ++k) {
            const std::size_t idx = Lattice::index(i, k);
            const double x = lat.x(i, k);
            lat.drift_[idx] = p.drift_at(t, x);
            lat.qv_drift_[idx] = p.qv_drift_at(t, x);
            lat.vol_[idx] = p.volatility_at(t, x);
            for (double v : {p.band.sigma_low(), p.band.sigma_high()}) {
                const Transition tr = lat.transition(idx, v * v);
                const double lowest = std::min({tr.down, tr.mid, tr.up});
                if (lowest < worst_p) {
                    worst_p = lowest;
                    worst_layer = i;
                    worst_k = k;
                    worst_v = v;
                }
            }
        }
    }
    if (worst_p < 0.0) {
        throw ConfigError("infeasible lattice transition probabilities: min probability " +
                          format_double(worst_p) + " at layer " + std::to_string(worst_layer) + ", node " +
                          std::to_string(static_cast<long long>(worst_k) - static_cast<long long>(worst_layer)) +
                          " (x=" + format_double(lat.x(worst_layer, worst_k)) + ", v=" + format_double(worst_v) +
                          "); need (sigma^2 v^2 dt + mean^2) / dx^2 <= 1");
    }
    return lat;
}

Lattice build_lattice(const Problem& p, const Grid& grid) { return build_lattice_dx(p, grid.nt(), grid.dx()); }

Lattice build_lattice(const Problem& p, std::size_t nt, std::size_t nx) {
    if (nx < 1) throw ConfigError("lattice requires nx >= 1");
    return build_lattice_dx(p, nt, (p.domain.x_hi - p.domain.x_lo) / static_cast<double>(nx + 1));
}

double max_lattice_penalty(const Lattice& lat) { return kPenaltyCap / lat.dt(); }

LatticeSolution solve_penalized(const Lattice& lat, const Problem& p, double n, const LatticeOptions& options) {
    if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("penalty level must be finite and >= 0");
    const double dt = lat.dt();
    const double dx = lat.dx();
    if (n * dt > kPenaltyCap * (1.0 + 1e-12)) {
        throw ConfigError("explicit penalty needs n * dt <= 0.9, got n=" + format_double(n) +
                          ", dt=" + format_double(dt));
    }
    if (!(dt * p.bounds.lipschitz_y < 1.0)) {
        throw ConfigError("explicit generator needs dt * L_y < 1, got " + format_double(dt * p.bounds.lipschitz_y));
    }
    const bool penalized = n > 0.0 && p.has_obstacle();
    const std::size_t nt = lat.nt();

    LatticeSolution sol;
    sol.penalty = n;
    sol.nt = nt;
    const std::size_t total = lat.node_count();
    sol.y.assign(total, 0.0);
    sol.z.assign(total, 0.0);
    sol.dl.assign(total, 0.0);
    sol.dk.assign(total, 0.0);
    sol.chosen_v2.assign(total, 0.0);

    const double t_end = lat.horizon();
    for (std::size_t k = 0; k < Lattice::layer_size(nt); ++k) {
        const std::size_t idx = Lattice::index(nt, k);
        const double x = lat.x(nt, k);
        sol.y[idx] = p.terminal_at(x);
        sol.z[idx] = p.volatility_at(t_end, x) * (p.terminal_at(x + dx) - p.terminal_at(x - dx)) / (2.0 * dx);
    }

    const double v2_low = lat.band().var_low();
    const double v2_high = lat.band().var_high();
    const bool degenerate = lat.band().degenerate();
    std::vector<std::size_t> exceed(nt, 0);

    for (std::size_t layer = nt; layer-- > 0;) {
        const double t = lat.t(layer);
        const std::size_t next_base = Lattice::index(layer + 1, 0);
        parallel_for(0, Lattice::layer_size(layer), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                const std::size_t idx = Lattice::index(layer, k);
                const double x = lat.x(layer, k);
                const double y_down = sol.y[next_base + k];
                const double y_mid = sol.y[next_base + k + 1];
                const double y_up = sol.y[next_base + k + 2];
                const double z = lat.volatility(idx) * (y_up - y_down) / (2.0 * dx);
                const double barrier = penalized ? p.obstacle_at(t, x) : 0.0;

                auto objective = [&](double v2, double& expected, double& penalty_rate) {
                    const Transition tr = lat.transition(idx, v2);
                    expected = tr.down * y_down + tr.mid * y_mid + tr.up * y_up;
                    penalty_rate = penalized ? n * std::max(barrier - expected, 0.0) : 0.0;
                    const double gen = p.time_generator_at(t, x, expected, z) +
                                       v2 * p.qv_generator_at(t, x, expected, z) + penalty_rate;
                    return expected + dt * gen;
                };

                double e_low = 0.0, pen_low = 0.0;
                const double q_low = objective(v2_low, e_low, pen_low);
                double q_high = q_low, pen_high = pen_low;
                if (!degenerate) {
                    double e_high = 0.0;
                    q_high = objective(v2_high, e_high, pen_high);
                }
                const bool high_wins = q_high >= q_low;
                const double best = high_wins ? q_high : q_low;
                sol.y[idx] = best;
                sol.z[idx] = z;
                sol.chosen_v2[idx] = high_wins ? v2_high : v2_low;
                sol.dk[idx] = (high_wins ? q_low : q_high) - best;
                sol.dl[idx] = (high_wins ? pen_high : pen_low) * dt;

                if (options.check_midpoint && !degenerate) {
                    double e_mid = 0.0, pen_mid = 0.0;
                    const double q_mid = objective(0.5 * (v2_low + v2_high), e_mid, pen_mid);
                    if (q_mid > best + 1e-12 * (1.0 + std::fabs(best))) ++exceed[layer];
                }
            }
        });
        for (std::size_t k = 0; k < Lattice::layer_size(layer); ++k) {
            if (!std::isfinite(sol.y[Lattice::index(layer, k)])) {
                throw DivergenceError("lattice solve diverged at layer " + std::to_string(layer) + ", node " +
                                          std::to_string(static_cast<long long>(k) - static_cast<long long>(layer)),
                                      layer);
            }
        }
    }
    for (std::size_t c : exceed) sol.midpoint_exceedances += c;
    return sol;
}

void LatticeSolution::write_csv(std::ostream& os, const Lattice& lat) const {
    os << "layer,node,x,Y,Z,dL,chosen_v2\n";
    for (std::size_t i = 0; i <= nt; ++i) {
        for (std::size_t k = 0; k < Lattice::layer_size(i); ++k) {
            const std::size_t idx = Lattice::index(i, k);
            os << i << ',' << static_cast<long long>(k) - static_cast<long long>(i) << ','
               << format_double(lat.x(i, k)) << ',' << format_double(y[idx]) << ',' << format_double(z[idx])
               << ',' << format_double(dl[idx]) << ',' << format_double(chosen_v2[idx]) << '\n';
        }
    }
}

FeedbackControl feedback_control(const LatticeSolution& sol, const Lattice& lat) {
    std::vector<double> levels(lat.nt() * lat.nt());
    for (std::size_t idx = 0; idx < levels.size(); ++idx) levels[idx] = std::sqrt(sol.chosen_v2[idx]);
    return FeedbackControl(lat.nt(), lat.dt(), lat.x_root(), lat.dx(), std::move(levels));
}

MartingaleReport reprice_under_scenario(const LatticeSolution& sol, const Lattice& lat, const Problem& p,
                                        const Control& control, std::size_t n_paths, std::uint64_t seed) {
    require_in_band(control, lat.band());
    if (n_paths == 0) throw ConfigError("repricing needs at least one path");
    const double dt = lat.dt();
    const double dx = lat.dx();
    const bool penalized = sol.penalty > 0.0 && p.has_obstacle();
    const CounterRng rng(seed);
    std::vector<double> residual(n_paths, 0.0);

    parallel_for(0, n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t path = lo; path < hi; ++path) {
            std::size_t k = 0;
            double total = 0.0;
            for (std::size_t i = 0; i < lat.nt(); ++i) {
                const std::size_t idx = Lattice::index(i, k);
                const double t = lat.t(i);
                const double x = lat.x(i, k);
                const double v = std::clamp(control_level(control, t, x), lat.band().sigma_low(),
                                            lat.band().sigma_high());
                const double v2 = v * v;
                const Transition tr = lat.transition(idx, v2);
                const std::size_t next_base = Lattice::index(i + 1, 0);
                const double expected = tr.down * sol.y[next_base + k] + tr.mid * sol.y[next_base + k + 1] +
                                        tr.up * sol.y[next_base + k + 2];
                const double z = sol.z[idx];
                double gen = p.time_generator_at(t, x, expected, z) + v2 * p.qv_generator_at(t, x, expected, z);
                if (penalized) gen += sol.penalty * std::max(p.obstacle_at(t, x) - expected, 0.0);

                const double u = rng.uniform(path, i);
                const std::size_t move = u < tr.down ? 0 : (u < tr.down + tr.mid ? 1 : 2);
                const double dx_move = (static_cast<double>(move) - 1.0) * dx;
                const double vol = lat.volatility(idx);
                const double d_b = vol != 0.0 ? (dx_move - tr.mean) / vol : 0.0;
                const double y_next = sol.y[next_base + k + move];
                total += y_next - sol.y[idx] + dt * gen - z * d_b;
                k += move;
            }
            residual[path] = total;
        }
    }, 64);

    const MeanAndError stats = mean_and_error(residual);
    return MartingaleReport{stats.mean, stats.standard_error, n_paths};
}

}  // namespace gbsde
