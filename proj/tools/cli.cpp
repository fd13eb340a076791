#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"
#include "gbsde/gsim.hpp"
#include "gbsde/harness.hpp"
#include "gbsde/lattice.hpp"
#include "gbsde/parallel.hpp"
#include "gbsde/pde_solver.hpp"
#include "gbsde/validate.hpp"

namespace gbsde::cli {

namespace {

namespace fs = std::filesystem;

struct ValidationFailure {};

struct RunConfig {
    std::string problem;
    std::string other;
    std::size_t nx = 399;
    std::size_t nt = 400;
    std::optional<double> x_lo;
    std::optional<double> x_hi;
    double cfl = 0.9;
    unsigned threads = 0;
    std::string out = ".";
    bool skip_validation = false;
    std::size_t density = 9;
    std::string method = "projection";
    double penalty = 1024.0;
    std::string penalty_list = "1,2,4,...,1024";
    std::string scenarios;
    std::size_t paths = 100000;
    std::size_t mc_nt = 100;
    std::size_t reprice_paths = 20000;
    std::optional<std::uint64_t> seed;
    std::string payoff;
    std::string export_paths;
    std::string lattice_out;
    double tolerance = 5e-3;
};

double parse_number(std::string_view token) {
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || end != token.data() + token.size() || !std::isfinite(v)) {
        throw ConfigError("not a number: '" + std::string(token) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

// "0.5,0.75,1": constant scenarios. "0.5/1": equal-length pieces over [0, T].
std::vector<Control> parse_scenarios(std::string_view text, const Problem& p) {
    std::vector<Control> out;
    if (text.empty()) {
        out.emplace_back(Scenario::constant(p.band.sigma_low(), p.horizon));
        if (!p.band.degenerate()) out.emplace_back(Scenario::constant(p.band.sigma_high(), p.horizon));
        return out;
    }
    for (std::string_view item : split(text, ',')) {
        std::vector<double> levels;
        for (std::string_view piece : split(item, '/')) levels.push_back(parse_number(piece));
        std::vector<double> breakpoints(levels.size() + 1);
        for (std::size_t k = 0; k < breakpoints.size(); ++k) {
            breakpoints[k] = k + 1 == breakpoints.size()
                                 ? p.horizon
                                 : p.horizon * static_cast<double>(k) / static_cast<double>(levels.size());
        }
        Control c = Scenario(std::move(breakpoints), std::move(levels));
        try {
            require_in_band(c, p.band);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("scenario '") + std::string(item) + "': " + e.what());
        }
        out.push_back(std::move(c));
    }
    return out;
}

GridSpec grid_spec(const RunConfig& cfg) {
    GridSpec spec;
    spec.nx = cfg.nx;
    spec.nt = cfg.nt;
    spec.x_lo = cfg.x_lo;
    spec.x_hi = cfg.x_hi;
    spec.cfl_safety = cfg.cfl;
    return spec;
}

Problem load_checked(const std::string& path, const RunConfig& cfg, std::ostream& out) {
    Problem p = load_problem(path);
    if (!cfg.skip_validation) {
        const ValidationReport report = validate(p, cfg.density);
        if (!report.passed()) {
            out << "validation failed for " << path << '\n';
            report.print(out);
            throw ValidationFailure{};
        }
    }
    return p;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out);
    const fs::path path = fs::path(cfg.out) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    return os;
}

void write_summary(const RunConfig& cfg, const Summary& summary, std::ostream& out) {
    open_output(cfg, "summary.json") << summary.to_json();
    for (const auto& a : summary.assertions) {
        out << (a.pass ? "PASS " : "FAIL ") << a.name << " value=" << format_double(a.value)
            << " bound=" << format_double(a.bound) << '\n';
    }
}

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed) throw ConfigError("--seed is required");
    return *cfg.seed;
}

void cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load_checked(cfg.problem, cfg, out);
    const Grid grid(p, grid_spec(cfg));
    const Field u = solve_terminal(p, grid);
    auto os = open_output(cfg, "u.csv");
    u.write_csv(os);
    out << "u(0, x0) = " << format_double(u.interpolate(std::size_t{0}, p.domain.x0)) << '\n';
    if (!cfg.lattice_out.empty()) {
        const Lattice lat = build_lattice(p, grid);
        const LatticeSolution sol = solve_penalized(lat, p, 0.0);
        auto ls = open_output(cfg, cfg.lattice_out);
        sol.write_csv(ls, lat);
        out << "lattice Y root = " << format_double(sol.root_y()) << '\n';
    }
}

void cmd_obstacle(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load_checked(cfg.problem, cfg, out);
    if (!p.has_obstacle()) throw ConfigError("problem has no obstacle");
    const Grid grid(p, grid_spec(cfg));
    std::optional<Field> u;
    if (cfg.method == "projection") {
        u = solve_obstacle_projection(p, grid);
    } else if (cfg.method == "penalty") {
        u = solve_obstacle_penalized(p, grid, cfg.penalty);
    } else {
        throw ConfigError("--method must be projection or penalty");
    }
    auto os = open_output(cfg, "u.csv");
    u->write_csv(os);
    out << "u(0, x0) = " << format_double(u->interpolate(std::size_t{0}, p.domain.x0)) << '\n';
}

void cmd_penalty(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load_checked(cfg.problem, cfg, out);
    const std::vector<double> levels = parse_penalty_list(cfg.penalty_list);
    const PenaltyReport report = run_penalty_sweep(p, grid_spec(cfg), levels);
    auto os = open_output(cfg, "penalty_report.csv");
    report.write_csv(os);
    write_summary(cfg, report.summary, out);
}

void cmd_compare(const RunConfig& cfg, std::ostream& out) {
    if (cfg.other.empty()) throw ConfigError("--other is required");
    std::vector<std::pair<Problem, Problem>> pairs;
    pairs.emplace_back(load_checked(cfg.problem, cfg, out), load_checked(cfg.other, cfg, out));
    const ComparisonReport report = run_comparison_suite(pairs, grid_spec(cfg));
    auto os = open_output(cfg, "compare_report.csv");
    report.write_csv(os);
    write_summary(cfg, report.summary, out);
}

void cmd_crosscheck(const RunConfig& cfg, std::ostream& out) {
    const std::uint64_t seed = require_seed(cfg);
    const Problem p = load_checked(cfg.problem, cfg, out);
    McConfig mc;
    mc.scenarios = parse_scenarios(cfg.scenarios, p);
    mc.n_paths = cfg.paths;
    mc.nt = cfg.mc_nt;
    mc.seed = seed;
    mc.repricing_paths = cfg.reprice_paths;
    const CrosscheckReport report = run_feynman_kac_crosscheck(p, grid_spec(cfg), mc, cfg.tolerance);
    auto os = open_output(cfg, "crosscheck.csv");
    report.write_csv(os);
    write_summary(cfg, report.summary, out);
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const std::uint64_t seed = require_seed(cfg);
    const Problem p = load_checked(cfg.problem, cfg, out);
    const std::vector<Control> scenarios = parse_scenarios(cfg.scenarios, p);
    const Expr payoff = cfg.payoff.empty() ? p.terminal : parse(cfg.payoff);
    const UpperExpectationEstimate est =
        estimate_upper_expectation(payoff, p, scenarios, cfg.paths, cfg.mc_nt, seed);
    auto os = open_output(cfg, "simulate.csv");
    os << "scenario,mean,standard_error\n";
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
        os << describe(scenarios[k]) << ',' << format_double(est.means[k]) << ','
           << format_double(est.standard_errors[k]) << '\n';
    }
    out << "estimate = " << format_double(est.estimate) << " +- " << format_double(est.standard_error)
        << " (argmax " << describe(scenarios[est.argmax]) << ")\n";
    if (!cfg.export_paths.empty()) {
        const PathBundle paths = sample_paths(p, scenarios[est.argmax], cfg.paths, cfg.mc_nt, seed);
        auto ps = open_output(cfg, cfg.export_paths);
        paths.write_csv(ps);
    }
}

void cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const Problem p = load_problem(cfg.problem);
    const ValidationReport report = validate(p, cfg.density);
    report.print(out);
    if (!report.passed()) throw ValidationFailure{};
}

}  // namespace

std::vector<double> parse_penalty_list(std::string_view text) {
    const std::vector<std::string_view> tokens = split(text, ',');
    std::vector<double> out;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        std::string_view token = tokens[k];
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        if (token != "...") {
            out.push_back(parse_number(token));
            continue;
        }
        if (out.size() < 2 || k + 1 >= tokens.size()) {
            throw ConfigError("'...' needs two values before it and one after it");
        }
        const double end = parse_number(tokens[++k]);
        const double ratio = out.back() / out[out.size() - 2];
        if (!(ratio > 1.0) || !std::isfinite(ratio)) throw ConfigError("'...' needs an increasing geometric start");
        double next = out.back() * ratio;
        while (next < end * (1.0 - 1e-12)) {
            out.push_back(next);
            next *= ratio;
        }
        if (std::fabs(next - end) > 1e-12 * end) {
            throw ConfigError("geometric progression does not reach " + format_double(end));
        }
        out.push_back(end);
    }
    for (std::size_t k = 1; k < out.size(); ++k) {
        if (!(out[k] > out[k - 1])) throw ConfigError("penalty levels must be strictly increasing");
    }
    if (out.empty() || out.front() < 0.0) throw ConfigError("penalty levels must be nonnegative");
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Quadratic reflected G-BSDE solvers and experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--threads", cfg.threads, "Worker thread cap (0 = hardware)")->check(CLI::NonNegativeNumber);

    auto add_common = [&](CLI::App* sub, bool grid) {
        sub->add_option("--problem", cfg.problem, "Problem file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", cfg.out, "Output directory");
        sub->add_flag("--skip-validation", cfg.skip_validation, "Do not validate the declared bounds first");
        sub->add_option("--density", cfg.density, "Validation sample points per axis")->check(CLI::Range(2, 1000));
        if (grid) {
            sub->add_option("--nx", cfg.nx, "Interior spatial nodes")->check(CLI::PositiveNumber);
            sub->add_option("--nt", cfg.nt, "Time steps")->check(CLI::PositiveNumber);
            sub->add_option("--x-lo", cfg.x_lo, "Left end of the spatial domain");
            sub->add_option("--x-hi", cfg.x_hi, "Right end of the spatial domain");
            sub->add_option("--cfl", cfg.cfl, "CFL safety factor in (0, 0.9]");
        }
    };
    auto add_seed = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--seed", cfg.seed, "Random seed");
        if (required) opt->required();
    };
    auto add_mc = [&](CLI::App* sub) {
        sub->add_option("--scenarios", cfg.scenarios,
                        "Volatility scenarios: comma-separated; 'a/b/c' splits [0,T] into equal pieces");
        sub->add_option("--paths", cfg.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
        sub->add_option("--mc-nt", cfg.mc_nt, "Monte Carlo time steps")->check(CLI::PositiveNumber);
    };

    auto* solve = app.add_subcommand("solve", "Solve the terminal-value PDE, writes u.csv");
    add_common(solve, true);
    solve->add_option("--lattice-out", cfg.lattice_out, "Also solve on the lattice and write this CSV");

    auto* obstacle = app.add_subcommand("obstacle", "Solve the obstacle PDE, writes u.csv");
    add_common(obstacle, true);
    obstacle->add_option("--method", cfg.method, "projection or penalty");
    obstacle->add_option("--n", cfg.penalty, "Penalty level for --method penalty")->check(CLI::NonNegativeNumber);

    auto* penalty = app.add_subcommand("penalty", "Penalty sweep, writes penalty_report.csv and summary.json");
    add_common(penalty, true);
    penalty->add_option("--n", cfg.penalty_list, "Penalty levels, e.g. 1,2,4,...,1024");
    add_seed(penalty, false);

    auto* compare = app.add_subcommand("compare", "Comparison check, writes compare_report.csv and summary.json");
    add_common(compare, true);
    compare->add_option("--other", cfg.other, "Problem whose data are dominated by --problem")
        ->required()
        ->check(CLI::ExistingFile);

    auto* crosscheck =
        app.add_subcommand("crosscheck", "PDE, lattice and Monte Carlo cross-check, writes crosscheck.csv");
    add_common(crosscheck, true);
    add_seed(crosscheck, true);
    add_mc(crosscheck);
    crosscheck->add_option("--reprice-paths", cfg.reprice_paths, "Lattice repricing paths per scenario");
    crosscheck->add_option("--tol", cfg.tolerance, "PDE versus lattice tolerance")->check(CLI::PositiveNumber);

    auto* simulate = app.add_subcommand("simulate", "Scenario Monte Carlo, writes simulate.csv");
    add_common(simulate, false);
    add_seed(simulate, true);
    add_mc(simulate);
    simulate->add_option("--payoff", cfg.payoff, "Payoff expression in x (defaults to phi)");
    simulate->add_option("--export-paths", cfg.export_paths, "Write the argmax scenario's paths to this CSV");

    auto* validate_cmd = app.add_subcommand("validate", "Check the declared bounds; writes nothing");
    add_common(validate_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << "usage: gbsde <solve|obstacle|penalty|compare|crosscheck|simulate|validate> --problem FILE [options]\n";
        return kExitUsage;
    }

    try {
        set_thread_count(cfg.threads);
        if (cfg.nx < 3) throw ConfigError("--nx must be at least 3");
        if (*solve) cmd_solve(cfg, out);
        else if (*obstacle) cmd_obstacle(cfg, out);
        else if (*penalty) cmd_penalty(cfg, out);
        else if (*compare) cmd_compare(cfg, out);
        else if (*crosscheck) cmd_crosscheck(cfg, out);
        else if (*simulate) cmd_simulate(cfg, out);
        else if (*validate_cmd) cmd_validate(cfg, out);
        return kExitOk;
    } catch (const ValidationFailure&) {
        return kExitValidation;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DivergenceError& e) {
        err << "solver diverged: " << e.what() << '\n';
        return kExitSolver;
    } catch (const EvalError& e) {
        err << "evaluation failed: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace gbsde::cli
