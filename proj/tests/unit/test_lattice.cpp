#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gbsde/errors.hpp"
#include "gbsde/lattice.hpp"
#include "support.hpp"

using namespace gbsde;
using gbsde::testing::make_problem;
using gbsde::testing::problem_file;

namespace {

// Independent oracle: exponential transform on a binomial random walk.
// Y0 = (1/2c) log E[exp(2c sigma W_T)] with W_T = sum of N steps +-sqrt(dt).
double binomial_exponential_oracle(double c, double sigma, double horizon, std::size_t steps) {
    const double dt = horizon / static_cast<double>(steps);
    return static_cast<double>(steps) * std::log(std::cosh(2.0 * c * sigma * std::sqrt(dt))) / (2.0 * c);
}

}  // namespace

TEST(Lattice, SymmetricWhenDriftless) {
    const Problem p = make_problem("", "x", 0.7, 0.7);
    const Lattice lat = build_lattice(p, 100, 99);
    const Transition tr = lat.transition(Lattice::index(10, 4), 0.49);
    EXPECT_EQ(tr.up, tr.down);
    EXPECT_NEAR((tr.up + tr.down) * lat.dx() * lat.dx(), 0.49 * lat.dt(), 1e-15);
    EXPECT_NEAR(tr.up + tr.mid + tr.down, 1.0, 1e-15);
}

TEST(Lattice, MomentsMatchTargets) {
    const Problem p = make_problem(R"j("b": "1", "h": "0.5*x/(1+abs(x))", "sigma": "1 + 0.1*x^2/(1+x^2)")j", "x");
    const Lattice lat = build_lattice(p, 200, 49);
    for (std::size_t i : {0u, 17u, 150u}) {
        for (std::size_t k = 0; k < Lattice::layer_size(i); k += 7) {
            const std::size_t idx = Lattice::index(i, k);
            for (double v2 : {p.band.var_low(), p.band.var_high()}) {
                const Transition tr = lat.transition(idx, v2);
                const double mean = (tr.up - tr.down) * lat.dx();
                const double second = (tr.up + tr.down) * lat.dx() * lat.dx();
                EXPECT_NEAR(mean, tr.mean, 1e-12);
                EXPECT_NEAR(second, tr.variance + tr.mean * tr.mean, 1e-12);
                const double x = lat.x(i, k);
                const double sigma = 1.0 + 0.1 * x * x / (1.0 + x * x);
                EXPECT_NEAR(tr.mean, (1.0 + 0.5 * x / (1.0 + std::fabs(x)) * v2) * lat.dt(), 1e-12);
                EXPECT_NEAR(tr.variance, sigma * sigma * v2 * lat.dt(), 1e-12);
            }
        }
    }
}

TEST(Lattice, ConstantDriftMean) {
    const Problem p = make_problem(R"("b": "1")", "x");
    const Lattice lat = build_lattice(p, 200, 99);
    for (std::size_t k = 0; k < Lattice::layer_size(30); ++k) {
        EXPECT_NEAR(lat.transition(Lattice::index(30, k), 1.0).mean, lat.dt(), 1e-15);
    }
}

TEST(Lattice, InfeasibleProbabilitiesAreRejected) {
    const Problem p = make_problem("", "x");
    EXPECT_THROW(build_lattice_dx(p, 10, 0.01), ConfigError);
    EXPECT_THROW(build_lattice_dx(p, 0, 0.1), ConfigError);
    EXPECT_NO_THROW(build_lattice_dx(p, 10, 0.5));
}

TEST(SolvePenalized, GHeatRoot) {
    const Problem p = problem_file("gheat.json");
    const Lattice lat = build_lattice(p, 400, 399);
    const LatticeSolution sol = solve_penalized(lat, p, 0.0);
    EXPECT_NEAR(sol.root_y(), 1.0, 1e-10);
    for (std::size_t i = 0; i < lat.nt(); ++i) {
        EXPECT_EQ(sol.chosen_v2[Lattice::index(i, 0)], p.band.var_high());
    }
    const Problem q = problem_file("gheat_lower.json");
    const LatticeSolution low = solve_penalized(build_lattice(q, 400, 399), q, 0.0);
    EXPECT_NEAR(low.root_y(), -0.25, 1e-10);
    EXPECT_EQ(low.chosen_v2[0], q.band.var_low());
}

TEST(SolvePenalized, QuadraticClassicalReduction) {
    const Problem p = problem_file("quadratic_classical.json");
    const double oracle = binomial_exponential_oracle(0.3, 0.5, 1.0, 400);
    EXPECT_NEAR(oracle, 0.075, 1e-5);
    const Lattice lat = build_lattice(p, 400, 199);
    const LatticeSolution sol = solve_penalized(lat, p, 0.0);
    EXPECT_NEAR(sol.root_y(), oracle, 0.02 * oracle);
    EXPECT_NEAR(sol.root_z(), 1.0, 1e-9);
}

TEST(SolvePenalized, BookkeepingSigns) {
    const Problem p = problem_file("call_obstacle.json");
    const Lattice lat = build_lattice(p, 400, 49);
    const LatticeSolution sol = solve_penalized(lat, p, 100.0);
    double total_dl = 0.0;
    for (std::size_t k = 0; k < sol.y.size(); ++k) {
        EXPECT_GE(sol.dl[k], 0.0);
        EXPECT_LE(sol.dk[k], 0.0);
        total_dl += sol.dl[k];
    }
    EXPECT_GT(total_dl, 0.0);
    std::ostringstream os;
    sol.write_csv(os, lat);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "layer,node,x,Y,Z,dL,chosen_v2");
}

TEST(SolvePenalized, MonotoneInPenalty) {
    const Problem p = problem_file("call_obstacle.json");
    const Lattice lat = build_lattice(p, 400, 49);
    const LatticeSolution a = solve_penalized(lat, p, 10.0);
    const LatticeSolution b = solve_penalized(lat, p, 20.0);
    for (std::size_t k = 0; k < a.y.size(); ++k) EXPECT_GE(b.y[k], a.y[k] - 1e-12);
}

TEST(SolvePenalized, RejectsUnstableParameters) {
    const Problem p = problem_file("call_obstacle.json");
    const Lattice lat = build_lattice(p, 400, 49);
    EXPECT_THROW(solve_penalized(lat, p, 1000.0), ConfigError);
    EXPECT_THROW(solve_penalized(lat, p, -1.0), DomainError);
    EXPECT_NEAR(max_lattice_penalty(lat) * lat.dt(), 0.9, 1e-12);
    Problem stiff = p;
    stiff.bounds.lipschitz_y = 1000.0;
    EXPECT_THROW(solve_penalized(lat, stiff, 1.0), ConfigError);
}

TEST(Reprice, DegenerateBandIsAMartingale) {
    const Problem p = problem_file("quadratic_classical.json");
    const Lattice lat = build_lattice(p, 200, 99);
    const LatticeSolution sol = solve_penalized(lat, p, 0.0);
    const MartingaleReport r = reprice_under_scenario(sol, lat, p, Scenario::constant(0.5, 1.0), 20000, 5);
    EXPECT_LE(std::fabs(r.mean), 3.0 * r.standard_error + 1e-12);
}

TEST(Reprice, SuboptimalScenarioHasNonpositiveDrift) {
    const Problem p = problem_file("gheat.json");
    const Lattice lat = build_lattice(p, 200, 199);
    const LatticeSolution sol = solve_penalized(lat, p, 0.0);
    const MartingaleReport low = reprice_under_scenario(sol, lat, p, Scenario::constant(0.5, 1.0), 20000, 5);
    EXPECT_LE(low.mean, 3.0 * low.standard_error);
    EXPECT_LT(low.mean, -0.5);
    const MartingaleReport best = reprice_under_scenario(sol, lat, p, feedback_control(sol, lat), 20000, 5);
    EXPECT_LE(std::fabs(best.mean), 3.0 * best.standard_error);
    EXPECT_THROW(reprice_under_scenario(sol, lat, p, Scenario::constant(2.0, 1.0), 10, 5), DomainError);
}

TEST(Reprice, FeedbackControlOnObstacleProblem) {
    const Problem p = problem_file("call_obstacle.json");
    const Lattice lat = build_lattice(p, 400, 49);
    const LatticeSolution sol = solve_penalized(lat, p, max_lattice_penalty(lat));
    const FeedbackControl fb = feedback_control(sol, lat);
    for (double v : fb.levels()) EXPECT_TRUE(p.band.contains(v, 1e-12));
    const MartingaleReport best = reprice_under_scenario(sol, lat, p, fb, 20000, 9);
    EXPECT_LE(std::fabs(best.mean), 3.0 * best.standard_error + 1e-10);
}
