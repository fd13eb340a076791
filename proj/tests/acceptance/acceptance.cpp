// Acceptance suite: one PASS/FAIL line per primary criterion.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"
#include "gbsde/gsim.hpp"
#include "gbsde/harness.hpp"
#include "gbsde/lattice.hpp"
#include "gbsde/parallel.hpp"
#include "gbsde/pde_solver.hpp"
#include "support.hpp"

using namespace gbsde;
using gbsde::testing::problem_file;
using gbsde::testing::problem_path;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double time_limit, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream timing;
    timing << std::fixed << std::setprecision(2) << seconds << " s";
    if (time_limit > 0.0) {
        timing << " (limit " << time_limit << " s)";
        if (seconds >= time_limit) {
            o.pass = false;
            o.detail += "; runtime limit exceeded";
        }
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << title << "  " << o.detail << "  ["
              << timing.str() << "]" << std::endl;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

GridSpec grid(std::size_t nx, std::size_t nt) {
    GridSpec s;
    s.nx = nx;
    s.nt = nt;
    return s;
}

// 400 intervals on [-12, 12] so x = 0 is a node.
const GridSpec kHeatGrid = grid(399, 400);

Problem with(Problem p, const char* field, const std::string& expr) {
    const std::string f(field);
    if (f == "phi") p.terminal = parse(expr);
    else if (f == "f") p.qv_generator = parse(expr);
    else if (f == "g") p.time_generator = parse(expr);
    else if (f == "l") p.obstacle = parse(expr);
    else if (f == "no_l") p.obstacle.reset();
    p.check();
    return p;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    for (int k = 1; k + 1 < argc; ++k) {
        if (std::strcmp(argv[k], "--threads") == 0) set_thread_count(static_cast<unsigned>(std::atoi(argv[k + 1])));
    }
    std::cout << "threads: " << thread_count() << "\n";

    const Problem heat = problem_file("gheat.json");
    const Problem heat_lower = problem_file("gheat_lower.json");
    const Problem quadratic = problem_file("quadratic_classical.json");
    const Problem call = problem_file("call_obstacle.json");

    criterion(1, "G-heat upper value", 10.0, [&] {
        const double u = solve_terminal(heat, Grid(heat, kHeatGrid)).interpolate(std::size_t{0}, 0.0);
        return Outcome{u >= 0.99 && u <= 1.01, "u(0,0)=" + fmt(u) + " in [0.99, 1.01]"};
    });

    criterion(2, "G-heat lower value", 10.0, [&] {
        const double u =
            solve_terminal(heat_lower, Grid(heat_lower, kHeatGrid)).interpolate(std::size_t{0}, 0.0);
        return Outcome{u >= -0.2525 && u <= -0.2475, "u(0,0)=" + fmt(u) + " in [-0.2525, -0.2475]"};
    });

    criterion(3, "quadratic generator, classical reduction", 30.0, [&] {
        const double target = 0.3 * 0.25 * 1.0;
        const Lattice lat = build_lattice(quadratic, 400, 199);
        const double y = solve_penalized(lat, quadratic, 0.0).root_y();
        const double rel = std::fabs(y - target) / target;
        return Outcome{rel < 0.02, "Y0=" + fmt(y) + " target " + fmt(target) + " rel.err " + fmt(rel) + " < 0.02"};
    });

    criterion(4, "finite differences vs lattice", 0.0, [&] {
        const Grid g(heat, kHeatGrid);
        const double u = solve_terminal(heat, g).interpolate(std::size_t{0}, 0.0);
        const double y = solve_penalized(build_lattice(heat, g), heat, 0.0).root_y();
        const double gap = std::fabs(u - y);
        return Outcome{gap < 5e-3, "|u - Y|=" + fmt(gap) + " < 5e-3"};
    });

    criterion(5, "penalty convergence, n = 2^0..2^10", 120.0, [&] {
        std::vector<double> levels;
        for (int k = 0; k <= 10; ++k) levels.push_back(std::ldexp(1.0, k));
        const PenaltyReport r = run_penalty_sweep(call, grid(199, 1200), levels);
        std::string detail;
        for (const auto& a : r.summary.assertions) {
            detail += (a.pass ? "" : "!") + a.name + "=" + fmt(a.value) + " ";
        }
        return Outcome{r.summary.passed(), detail};
    });

    criterion(6, "comparison suite, 10 ordered pairs", 0.0, [&] {
        const Problem band_z = with(with(with(quadratic, "phi", "max(x, 0)"), "f", "0.1*z^2"), "no_l", "");
        Problem banded = band_z;
        banded.band = GCoefficients(0.5, 1.0);
        const std::vector<std::pair<Problem, Problem>> pairs{
            {with(heat, "phi", "x^2 + 1"), heat},
            {heat, heat},
            {with(quadratic, "f", "0.3*z^2 + 0.1"), quadratic},
            {with(banded, "f", "0.2*z^2"), banded},
            {with(call, "g", "-0.2*y + 0.05"), call},
            {with(with(call, "phi", "max(1.1 - x, 0)"), "l", "max(1.1 - x, 0)"), call},
            {call, with(call, "l", "max(1 - x, 0) - 0.1*(1 - t)")},
            {call, with(call, "no_l", "")},
            {heat, with(heat, "phi", "x^2 - 0.5*abs(x)")},
            {with(banded, "g", "0.1*abs(x)/(1 + abs(x)) - 0.1*y"), with(banded, "g", "-0.1*y")},
        };
        const ComparisonReport r = run_comparison_suite(pairs, grid(199, 800));
        std::size_t violations = 0;
        bool ordered = true;
        for (const auto& row : r.rows) {
            violations += row.violations;
            ordered = ordered && row.ordered_data;
        }
        return Outcome{r.summary.passed(), std::to_string(pairs.size()) + " pairs, data ordered: " +
                                               (ordered ? "yes" : "no") +
                                               ", violations=" + std::to_string(violations)};
    });

    criterion(7, "scenario lower bound and exponential martingale", 0.0, [&] {
        const std::vector<Control> scenarios{Scenario::constant(0.5, 1.0), Scenario::constant(0.75, 1.0),
                                             Scenario::constant(1.0, 1.0)};
        const double pde = solve_terminal(heat, Grid(heat, kHeatGrid)).interpolate(std::size_t{0}, 0.0);
        const auto est = estimate_upper_expectation(heat.terminal, heat, scenarios, 100000, 100, 2024);
        const double slack = pde + 3.0 * est.standard_error + 1e-2 - est.estimate;
        bool pass = slack >= 0.0 && est.argmax == 2;
        std::string detail = "estimate=" + fmt(est.estimate) + " SE=" + fmt(est.standard_error) +
                             " slack=" + fmt(slack) + " argmax=" + describe(scenarios[est.argmax]);
        const Field one(Grid(heat.domain.x_lo, heat.domain.x_hi, 9, 10, heat.horizon), 1.0);
        for (double v : {0.5, 1.0}) {
            const auto m = exp_martingale_check(one, heat, Scenario::constant(v, 1.0), 100000, 100, 2024);
            const bool ok = !m.diverged && std::fabs(m.mean - 1.0) <= 3.0 * m.standard_error;
            pass = pass && ok;
            detail += " E[exp]@" + fmt(v) + "=" + fmt(m.mean) + "+-" + fmt(m.standard_error);
        }
        return Outcome{pass, detail};
    });

    criterion(8, "invariant suites", 0.0, [&] {
        // G sublinearity, positive homogeneity, monotonicity.
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> arg(-100.0, 100.0);
        std::uniform_real_distribution<double> lam(0.0, 100.0);
        const GCoefficients band(0.5, 1.0);
        std::size_t g_violations = 0;
        for (int k = 0; k < 10000; ++k) {
            const double a = arg(gen);
            const double b = arg(gen);
            const double l = lam(gen);
            const double tol = 1e-12 * (1.0 + std::fabs(a) + std::fabs(b)) * (1.0 + l);
            if (g_eval(band, a + b) > g_eval(band, a) + g_eval(band, b) + tol) ++g_violations;
            if (std::fabs(g_eval(band, l * a) - l * g_eval(band, a)) > tol) ++g_violations;
            if (g_eval(band, std::min(a, b)) > g_eval(band, std::max(a, b))) ++g_violations;
        }

        // Parser fuzz: only ParseError / EvalError are acceptable outcomes.
        std::size_t crashes = 0;
        for (int k = 0; k < 100000; ++k) {
            std::string s(gen() % 48, ' ');
            for (auto& c : s) c = static_cast<char>(gen() % 256);
            try {
                parse(s).eval(Env::txyz(0.5, 0.5, 0.5, 0.5));
            } catch (const ParseError&) {
            } catch (const EvalError&) {
            } catch (...) {
                ++crashes;
            }
        }

        // Quadratic-variation band on every simulated step.
        std::size_t band_failures = 0;
        const Lattice lat = build_lattice(call, 400, 49);
        const LatticeSolution sol = solve_penalized(lat, call, max_lattice_penalty(lat));
        const std::vector<Control> controls{Scenario::constant(0.5, 1.0), Scenario({0.0, 0.4, 1.0}, {1.0, 0.6}),
                                            feedback_control(sol, lat)};
        for (const Control& c : controls) {
            if (!qv_band_holds(sample_paths(call, c, 5000, 100, 31), call.band)) ++band_failures;
        }

        // Byte-identical artifacts on repeated runs, across thread counts.
        const auto dir = std::filesystem::temp_directory_path() / "gbsde_acceptance";
        std::filesystem::remove_all(dir);
        bool identical = true;
        for (const char* sub : {"a", "b"}) {
            const std::string out = (dir / sub).string();
            const std::string threads = std::string(sub) == "a" ? "1" : "3";
            const std::vector<std::vector<std::string>> runs{
                {"simulate", "--problem", problem_path("call_obstacle.json"), "--seed", "77", "--paths", "2000",
                 "--mc-nt", "50", "--export-paths", "paths.csv", "--threads", threads, "--out", out},
                {"solve", "--problem", problem_path("gheat.json"), "--threads", threads, "--out", out}};
            for (auto args : runs) {
                args.insert(args.begin(), "gbsde");
                std::vector<const char*> argv_list;
                for (const auto& a : args) argv_list.push_back(a.c_str());
                std::ostringstream sink;
                if (cli::run(static_cast<int>(argv_list.size()), argv_list.data(), sink, sink) != 0) identical = false;
            }
        }
        for (const char* file : {"paths.csv", "simulate.csv", "u.csv"}) {
            const std::string a = slurp(dir / "a" / file);
            identical = identical && !a.empty() && a == slurp(dir / "b" / file);
        }
        std::filesystem::remove_all(dir);

        const bool pass = g_violations == 0 && crashes == 0 && band_failures == 0 && identical;
        return Outcome{pass, "G violations=" + std::to_string(g_violations) + ", parser crashes=" +
                                 std::to_string(crashes) + ", QV band failures=" + std::to_string(band_failures) +
                                 ", byte-identical=" + (identical ? "yes" : "no")};
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
