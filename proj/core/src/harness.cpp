#include "gbsde/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"
#include "gbsde/gsim.hpp"
#include "gbsde/lattice.hpp"
#include "gbsde/pde_solver.hpp"

namespace gbsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Ordering slack for node-wise comparisons: floating-point rounding only.
double order_slack(double a, double b) { return 1e-12 * (1.0 + std::max(std::fabs(a), std::fabs(b))); }

std::string config_hash(const std::string& experiment, const Problem& p, const GridSpec& grid,
                        const std::string& extra) {
    return hex64(fnv1a64(experiment + "|" + problem_to_json(p) + "|" + describe(grid) + "|" + extra));
}

Assertion at_most(std::string name, double value, double bound) {
    return Assertion{std::move(name), value <= bound, value, bound};
}

Assertion at_least(std::string name, double value, double bound) {
    return Assertion{std::move(name), value >= bound, value, bound};
}

bool is_zero_expr(const Expr& e) { return e.kind() == NodeKind::number && e.value() == 0.0; }

Field solve_value(const Problem& p, const Grid& grid) {
    return p.has_obstacle() ? solve_obstacle_projection(p, grid) : solve_terminal(p, grid);
}

std::string csv_double(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

}  // namespace

std::string describe(const GridSpec& grid) {
    std::ostringstream os;
    os << "nx=" << grid.nx << ",nt=" << grid.nt;
    if (grid.x_lo) os << ",x_lo=" << format_double(*grid.x_lo);
    if (grid.x_hi) os << ",x_hi=" << format_double(*grid.x_hi);
    os << ",cfl=" << format_double(grid.cfl_safety);
    return os.str();
}

bool Summary::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

const Assertion* Summary::find(const std::string& name) const {
    for (const auto& a : assertions) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

std::string Summary::to_json() const {
    using nlohmann::json;
    auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json doc;
    doc["experiment"] = experiment;
    doc["config_hash"] = config_hash;
    json list = json::array();
    for (const auto& a : assertions) {
        list.push_back({{"name", a.name}, {"pass", a.pass}, {"value", number(a.value)}, {"bound", number(a.bound)}});
    }
    doc["assertions"] = std::move(list);
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

void PenaltyReport::write_csv(std::ostream& os) const {
    os << "solver,n,max_deficit,max_step_change,max_abs_y,monotonicity_violations\n";
    for (const auto& r : rows) {
        os << r.solver << ',' << csv_double(r.n) << ',' << csv_double(r.max_deficit) << ','
           << csv_double(r.max_step_change) << ',' << csv_double(r.max_abs_y) << ',' << r.monotonicity_violations
           << '\n';
    }
}

PenaltyReport run_penalty_sweep(const Problem& p, const GridSpec& spec, std::span<const double> n_list) {
    if (!p.has_obstacle()) throw ConfigError("penalty sweep needs an obstacle");
    if (n_list.empty()) throw ConfigError("penalty sweep needs at least one penalty level");
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (!(n_list[k] >= 0.0) || (k > 0 && !(n_list[k] > n_list[k - 1]))) {
            throw ConfigError("penalty levels must be nonnegative and strictly increasing");
        }
    }
    const Grid grid(p, spec);
    const Lattice lat = build_lattice(p, grid);
    if (n_list.back() > max_lattice_penalty(lat) * (1.0 + 1e-12)) {
        throw ConfigError("largest penalty " + format_double(n_list.back()) + " exceeds the lattice limit 0.9/dt = " +
                          format_double(max_lattice_penalty(lat)) + "; increase nt");
    }

    // Obstacle values at every node of each solver's mesh.
    std::vector<double> lattice_obstacle(lat.node_count());
    for (std::size_t i = 0; i <= lat.nt(); ++i) {
        for (std::size_t k = 0; k < Lattice::layer_size(i); ++k) {
            lattice_obstacle[Lattice::index(i, k)] = p.obstacle_at(lat.t(i), lat.x(i, k));
        }
    }
    std::vector<double> grid_obstacle((grid.nt() + 1) * grid.nodes());
    for (std::size_t i = 0; i <= grid.nt(); ++i) {
        for (std::size_t j = 0; j < grid.nodes(); ++j) {
            grid_obstacle[i * grid.nodes() + j] = p.obstacle_at(grid.t(i), grid.x(j));
        }
    }

    PenaltyReport report;
    report.summary.experiment = "penalty";
    std::string levels;
    for (double n : n_list) levels += format_double(n) + ";";
    report.summary.config_hash = config_hash("penalty", p, spec, levels);

    for (const std::string solver : {"lattice", "pde"}) {
        std::vector<double> prev;
        const std::size_t first_row = report.rows.size();
        for (double n : n_list) {
            const auto start = std::chrono::steady_clock::now();
            std::vector<double> values;
            if (solver == "lattice") {
                values = solve_penalized(lat, p, n).y;
            } else {
                const Field u = solve_obstacle_penalized(p, grid, n);
                values.assign(u.values().begin(), u.values().end());
            }
            const auto& obstacle = solver == "lattice" ? lattice_obstacle : grid_obstacle;
            PenaltyRow row;
            row.solver = solver;
            row.n = n;
            row.max_step_change = prev.empty() ? kNaN : 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) {
                row.max_deficit = std::max(row.max_deficit, obstacle[k] - values[k]);
                row.max_abs_y = std::max(row.max_abs_y, std::fabs(values[k]));
                if (!prev.empty()) {
                    row.max_step_change = std::max(row.max_step_change, std::fabs(values[k] - prev[k]));
                    if (values[k] < prev[k] - order_slack(values[k], prev[k])) ++row.monotonicity_violations;
                }
            }
            row.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            report.rows.push_back(row);
            prev = std::move(values);
        }

        const std::span<const PenaltyRow> rows(report.rows.data() + first_row, report.rows.size() - first_row);
        std::size_t violations = 0;
        std::size_t deficit_increases = 0;
        double y_min = std::numeric_limits<double>::infinity();
        double y_max = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            violations += rows[k].monotonicity_violations;
            if (k > 0 && rows[k].max_deficit > rows[k - 1].max_deficit) ++deficit_increases;
            y_min = std::min(y_min, rows[k].max_abs_y);
            y_max = std::max(y_max, rows[k].max_abs_y);
        }
        auto& out = report.summary.assertions;
        out.push_back(at_most(solver + ".monotone_in_n", static_cast<double>(violations), 0.0));
        out.push_back(at_most(solver + ".deficit_increases", static_cast<double>(deficit_increases), 0.0));
        out.push_back(at_most(solver + ".final_deficit", rows.back().max_deficit, 1e-2));
        // Successive-change contraction over the last three doublings.
        if (rows.size() >= 5) {
            double worst_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t k = rows.size() - 3; k < rows.size(); ++k) {
                const double before = rows[k - 1].max_step_change;
                const double after = rows[k].max_step_change;
                const double ratio = after > 0.0 ? before / after : std::numeric_limits<double>::infinity();
                worst_ratio = std::min(worst_ratio, ratio);
            }
            out.push_back(at_least(solver + ".cauchy_contraction", worst_ratio, 1.5));
        }
        const double variation = y_max > 0.0 ? (y_max - y_min) / y_max : 0.0;
        out.push_back(at_most(solver + ".y_bound_variation", variation, 0.05));
    }
    return report;
}

// ---------------------------------------------------------------------------

void ComparisonReport::write_csv(std::ostream& os) const {
    os << "pair,solver,ordered_data,violations,min_gap,max_gap\n";
    for (const auto& r : rows) {
        os << r.pair << ',' << r.solver << ',' << (r.ordered_data ? 1 : 0) << ',' << r.violations << ','
           << csv_double(r.min_gap) << ',' << csv_double(r.max_gap) << '\n';
    }
}

namespace {

// Sampled check that the first problem's data dominate the second's.
bool data_ordered(const Problem& hi, const Problem& lo, const Grid& grid) {
    if (lo.has_obstacle() && !hi.has_obstacle()) return false;
    const std::size_t stride = std::max<std::size_t>(1, grid.nodes() / 64);
    constexpr std::array<double, 5> yz{-2.0, -1.0, 0.0, 1.0, 2.0};
    for (std::size_t j = 0; j < grid.nodes(); j += stride) {
        const double x = grid.x(j);
        if (hi.terminal_at(x) < lo.terminal_at(x)) return false;
        for (std::size_t s = 0; s <= 4; ++s) {
            const double t = grid.horizon() * static_cast<double>(s) / 4.0;
            if (hi.obstacle_at(t, x) < lo.obstacle_at(t, x)) return false;
            for (double y : yz) {
                for (double z : yz) {
                    if (hi.qv_generator_at(t, x, y, z) < lo.qv_generator_at(t, x, y, z)) return false;
                    if (hi.time_generator_at(t, x, y, z) < lo.time_generator_at(t, x, y, z)) return false;
                }
            }
        }
    }
    return true;
}

ComparisonRow compare_values(std::span<const double> hi, std::span<const double> lo) {
    ComparisonRow row;
    row.min_gap = std::numeric_limits<double>::infinity();
    row.max_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < hi.size(); ++k) {
        const double gap = hi[k] - lo[k];
        row.min_gap = std::min(row.min_gap, gap);
        row.max_gap = std::max(row.max_gap, gap);
        if (gap < -order_slack(hi[k], lo[k])) ++row.violations;
    }
    return row;
}

}  // namespace

ComparisonReport run_comparison_suite(std::span<const std::pair<Problem, Problem>> pairs, const GridSpec& spec) {
    ComparisonReport report;
    report.summary.experiment = "compare";
    std::string joined;
    for (const auto& [hi, lo] : pairs) joined += problem_to_json(hi) + "/" + problem_to_json(lo) + ";";
    report.summary.config_hash = hex64(fnv1a64("compare|" + joined + describe(spec)));

    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const Problem& hi = pairs[k].first;
        const Problem& lo = pairs[k].second;
        const Grid grid(hi, spec);
        grid.require_cfl(lo);
        const bool ordered = data_ordered(hi, lo, grid);
        const std::string tag = "pair" + std::to_string(k);
        report.summary.assertions.push_back(Assertion{tag + ".ordered_data", ordered, ordered ? 1.0 : 0.0, 1.0});

        const Field u_hi = solve_value(hi, grid);
        const Field u_lo = solve_value(lo, grid);
        ComparisonRow pde = compare_values(u_hi.values(), u_lo.values());
        pde.pair = k;
        pde.solver = "pde";
        pde.ordered_data = ordered;

        const Lattice lat_hi = build_lattice(hi, grid);
        const Lattice lat_lo = build_lattice(lo, grid);
        const double n_hi = hi.has_obstacle() ? max_lattice_penalty(lat_hi) : 0.0;
        const double n_lo = lo.has_obstacle() ? max_lattice_penalty(lat_lo) : 0.0;
        const LatticeSolution s_hi = solve_penalized(lat_hi, hi, std::max(n_hi, n_lo));
        const LatticeSolution s_lo = solve_penalized(lat_lo, lo, std::max(n_hi, n_lo));
        ComparisonRow lattice = compare_values(s_hi.y, s_lo.y);
        lattice.pair = k;
        lattice.solver = "lattice";
        lattice.ordered_data = ordered;

        for (const ComparisonRow* row : {&pde, &lattice}) {
            report.summary.assertions.push_back(
                at_most(tag + "." + row->solver + ".violations", static_cast<double>(row->violations), 0.0));
            report.rows.push_back(*row);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

void CrosscheckReport::write_csv(std::ostream& os) const {
    os << "quantity,value\n";
    os << "pde_value," << csv_double(pde_value) << '\n';
    os << "lattice_value," << csv_double(lattice_value) << '\n';
    os << "pde_lattice_gap," << csv_double(std::fabs(pde_value - lattice_value)) << '\n';
    os << "pde_z," << csv_double(pde_z) << '\n';
    os << "lattice_z," << csv_double(lattice_z) << '\n';
    if (mc_estimate) {
        os << "mc_estimate," << csv_double(*mc_estimate) << '\n';
        os << "mc_standard_error," << csv_double(*mc_standard_error) << '\n';
        os << "mc_argmax," << *mc_argmax << '\n';
        os << "mc_slack," << csv_double(pde_value + 3.0 * *mc_standard_error - *mc_estimate) << '\n';
    }
    if (bmo) os << "bmo_heuristic," << csv_double(*bmo) << '\n';
    for (const auto& [name, stats] : residuals) {
        os << "residual_mean[" << name << "]," << csv_double(stats.first) << '\n';
        os << "residual_se[" << name << "]," << csv_double(stats.second) << '\n';
    }
}

CrosscheckReport run_feynman_kac_crosscheck(const Problem& p, const GridSpec& spec, const McConfig& mc,
                                            double agreement_tol) {
    CrosscheckReport report;
    report.summary.experiment = "crosscheck";
    std::string extra = "paths=" + std::to_string(mc.n_paths) + ",nt=" + std::to_string(mc.nt) +
                        ",seed=" + std::to_string(mc.seed) + ",reprice=" + std::to_string(mc.repricing_paths) +
                        ",tol=" + format_double(agreement_tol) + ",scenarios=";
    for (const auto& c : mc.scenarios) extra += describe(c) + ";";
    report.summary.config_hash = config_hash("crosscheck", p, spec, extra);

    const Grid grid(p, spec);
    const Field u = solve_value(p, grid);
    report.pde_value = u.interpolate(std::size_t{0}, p.domain.x0);
    const Field z = gradient_field(p, u);
    report.pde_z = z.interpolate(std::size_t{0}, p.domain.x0);

    const Lattice lat = build_lattice(p, grid);
    const double n = p.has_obstacle() ? max_lattice_penalty(lat) : 0.0;
    const LatticeSolution sol = solve_penalized(lat, p, n);
    report.lattice_value = sol.root_y();
    report.lattice_z = sol.root_z();

    auto& out = report.summary.assertions;
    out.push_back(at_most("pde_vs_lattice", std::fabs(report.pde_value - report.lattice_value), agreement_tol));

    const bool linear_expectation =
        is_zero_expr(p.qv_generator) && is_zero_expr(p.time_generator) && !p.has_obstacle();
    if (linear_expectation && !mc.scenarios.empty() && mc.n_paths > 0) {
        const auto est = estimate_upper_expectation(p.terminal, p, mc.scenarios, mc.n_paths, mc.nt, mc.seed);
        report.mc_estimate = est.estimate;
        report.mc_standard_error = est.standard_error;
        report.mc_argmax = est.argmax;
        out.push_back(at_most("mc_lower_bound", est.estimate - report.pde_value - 3.0 * est.standard_error, 1e-2));
    }
    if (!mc.scenarios.empty() && mc.n_paths > 0) {
        report.bmo = bmo_estimate(z, p, mc.scenarios, std::min<std::size_t>(mc.n_paths, 10000), mc.nt, mc.seed);
    }

    if (mc.repricing_paths > 0) {
        const double floor = 1e-10 * (1.0 + std::fabs(sol.root_y()));
        for (const Control& c : mc.scenarios) {
            const MartingaleReport r = reprice_under_scenario(sol, lat, p, c, mc.repricing_paths, mc.seed);
            report.residuals.push_back({describe(c), {r.mean, r.standard_error}});
            out.push_back(at_most("residual_nonpositive[" + describe(c) + "]", r.mean,
                                  3.0 * r.standard_error + floor));
        }
        const Control chosen = feedback_control(sol, lat);
        const MartingaleReport r = reprice_under_scenario(sol, lat, p, chosen, mc.repricing_paths, mc.seed);
        report.residuals.push_back({"maximizer", {r.mean, r.standard_error}});
        out.push_back(at_most("residual_zero[maximizer]", std::fabs(r.mean), 3.0 * r.standard_error + floor));
    }
    return report;
}

// ---------------------------------------------------------------------------

void StabilityReport::write_csv(std::ostream& os) const {
    os << "delta,gap_full,gap_half,ratio\n";
    os << csv_double(delta) << ',' << csv_double(gap_full) << ',' << csv_double(gap_half) << ','
       << csv_double(ratio) << '\n';
}

StabilityReport run_stability(const Problem& p, double delta, const GridSpec& spec) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("stability perturbation must be >= 0");
    StabilityReport report;
    report.delta = delta;
    report.summary.experiment = "stability";
    report.summary.config_hash = config_hash("stability", p, spec, "delta=" + format_double(delta));

    const Grid grid(p, spec);
    auto shifted = [&](double by) {
        Problem q = p;
        q.terminal = Expr::binary(NodeKind::add, p.terminal, Expr::number(by));
        return q;
    };
    const Field base = solve_value(p, grid);
    report.gap_full = max_abs_difference(solve_value(shifted(delta), grid), base);
    report.gap_half = max_abs_difference(solve_value(shifted(0.5 * delta), grid), base);
    report.ratio = report.gap_half > 0.0 ? report.gap_full / report.gap_half : kNaN;

    if (delta > 0.0) {
        report.summary.assertions.push_back(
            Assertion{"ratio_in_[1.5,2.5]", report.ratio >= 1.5 && report.ratio <= 2.5, report.ratio, 2.0});
    } else {
        report.summary.assertions.push_back(at_most("zero_gap", report.gap_full, 0.0));
    }
    return report;
}

}  // namespace gbsde
