#include "gbsde/gsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"
#include "gbsde/parallel.hpp"
#include "gbsde/rng.hpp"

namespace gbsde {

namespace {

constexpr double kOverflowExponent = 700.0;

struct StepState {
    std::size_t step;
    double t;
    double b;
    double qv;
    double x;
    double d_b;   // increment into this state (0 at step 0)
    double d_qv;
};

// Simulates one path, calling visit(state) at every time point 0..nt.
template <typename Visitor>
void simulate_path(const Problem& p, const Control& control, const CounterRng& rng, std::size_t path,
                   std::size_t nt, double dt, Visitor&& visit) {
    StepState s{0, 0.0, 0.0, 0.0, p.domain.x0, 0.0, 0.0};
    visit(s);
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t i = 0; i < nt; ++i) {
        const double v = std::clamp(control_level(control, s.t, s.x), p.band.sigma_low(), p.band.sigma_high());
        const double d_qv = v * v * dt;
        const double d_b = v * sqrt_dt * rng.normal(path, i);
        const double dx = p.drift_at(s.t, s.x) * dt + p.qv_drift_at(s.t, s.x) * d_qv + p.volatility_at(s.t, s.x) * d_b;
        s.step = i + 1;
        s.t = s.step == nt ? p.horizon : static_cast<double>(s.step) * dt;
        s.b += d_b;
        s.qv += d_qv;
        s.x += dx;
        s.d_b = d_b;
        s.d_qv = d_qv;
        visit(s);
    }
}

void check_request(const Problem& p, const Control& control, std::size_t n_paths, std::size_t nt) {
    if (n_paths == 0) throw ConfigError("simulation needs at least one path");
    if (nt == 0) throw ConfigError("simulation needs nt >= 1");
    require_in_band(control, p.band);
}

}  // namespace

void PathBundle::write_csv(std::ostream& os) const {
    os << "path,step,t,B,QV,X\n";
    for (std::size_t path = 0; path < n_paths; ++path) {
        for (std::size_t step = 0; step <= nt; ++step) {
            const std::size_t o = offset(path, step);
            os << path << ',' << step << ',' << format_double(static_cast<double>(step) * dt) << ','
               << format_double(b[o]) << ',' << format_double(qv[o]) << ',' << format_double(x[o]) << '\n';
        }
    }
}

PathBundle sample_paths(const Problem& p, const Control& control, std::size_t n_paths, std::size_t nt,
                        std::uint64_t seed) {
    check_request(p, control, n_paths, nt);
    PathBundle out;
    out.n_paths = n_paths;
    out.nt = nt;
    out.dt = p.horizon / static_cast<double>(nt);
    out.seed = seed;
    const std::size_t total = n_paths * (nt + 1);
    out.b.resize(total);
    out.qv.resize(total);
    out.x.resize(total);
    const CounterRng rng(seed);
    const double qv_lo = p.band.var_low() * out.dt;
    const double qv_hi = p.band.var_high() * out.dt;
    std::vector<unsigned char> band_ok(n_paths, 1);
    parallel_for(0, n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t path = lo; path < hi; ++path) {
            simulate_path(p, control, rng, path, nt, out.dt, [&](const StepState& s) {
                if (s.step > 0 && (s.d_qv < qv_lo || s.d_qv > qv_hi)) band_ok[path] = 0;
                const std::size_t o = out.offset(path, s.step);
                out.b[o] = s.b;
                out.qv[o] = s.qv;
                out.x[o] = s.x;
            });
        }
    }, 64);
    if (std::find(band_ok.begin(), band_ok.end(), 0) != band_ok.end() || !qv_band_holds(out, p.band)) {
        throw DomainError("simulated quadratic variation left the volatility band");
    }
    return out;
}

bool qv_band_holds(const PathBundle& paths, const GCoefficients& band) {
    const double lo = band.var_low() * paths.dt;
    const double hi = band.var_high() * paths.dt;
    // d<B> = v^2 dt is formed as (v*v)*dt; allow the last-bit rounding of
    // that product and of the running sum.
    for (std::size_t path = 0; path < paths.n_paths; ++path) {
        if (paths.qv[paths.offset(path, 0)] != 0.0 || paths.b[paths.offset(path, 0)] != 0.0) return false;
        for (std::size_t step = 0; step < paths.nt; ++step) {
            const double q0 = paths.qv[paths.offset(path, step)];
            const double q1 = paths.qv[paths.offset(path, step + 1)];
            const double inc = q1 - q0;
            const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(q1));
            if (inc < lo - slack || inc > hi + slack) return false;
        }
    }
    return true;
}

UpperExpectationEstimate estimate_upper_expectation(const Expr& payoff, const Problem& p,
                                                    std::span<const Control> scenarios, std::size_t n_paths,
                                                    std::size_t nt, std::uint64_t seed) {
    if (scenarios.empty()) throw ConfigError("upper expectation needs at least one scenario");
    if ((payoff.free_vars() & ~var_bit(Var::x)) != 0) {
        throw ConfigError("payoff may only depend on x, got: " + payoff.to_string());
    }
    const double dt = p.horizon / static_cast<double>(nt);
    const CounterRng rng(seed);
    UpperExpectationEstimate out;
    std::vector<double> values(n_paths);
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        check_request(p, scenarios[s], n_paths, nt);
        parallel_for(0, n_paths, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t path = lo; path < hi; ++path) {
                double x_end = 0.0;
                simulate_path(p, scenarios[s], rng, path, nt, dt, [&](const StepState& st) { x_end = st.x; });
                values[path] = payoff.eval(Env{}.bind(Var::x, x_end));
            }
        }, 256);
        const MeanAndError stats = mean_and_error(values);
        out.means.push_back(stats.mean);
        out.standard_errors.push_back(stats.standard_error);
        if (s == 0 || stats.mean > out.estimate) {
            out.estimate = stats.mean;
            out.standard_error = stats.standard_error;
            out.argmax = s;
        }
    }
    return out;
}

ExpMartingaleResult exp_martingale_check(const Field& z_field, const Problem& p, const Control& control,
                                         std::size_t n_paths, std::size_t nt, std::uint64_t seed) {
    check_request(p, control, n_paths, nt);
    const double dt = p.horizon / static_cast<double>(nt);
    const CounterRng rng(seed);
    std::vector<double> exponent(n_paths, 0.0);
    parallel_for(0, n_paths, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t path = lo; path < hi; ++path) {
            double log_e = 0.0;
            double z_prev = 0.0;
            simulate_path(p, control, rng, path, nt, dt, [&](const StepState& s) {
                // Z is taken at the left end of each step (Ito integral).
                if (s.step > 0) log_e += z_prev * s.d_b - 0.5 * z_prev * z_prev * s.d_qv;
                z_prev = z_field.interpolate(s.t, s.x);
            });
            exponent[path] = log_e;
        }
    }, 256);

    ExpMartingaleResult out;
    out.max_exponent = *std::max_element(exponent.begin(), exponent.end());
    if (!(out.max_exponent < kOverflowExponent)) {
        out.diverged = true;
        out.mean = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<double> values(n_paths);
    std::transform(exponent.begin(), exponent.end(), values.begin(), [](double e) { return std::exp(e); });
    const MeanAndError stats = mean_and_error(values);
    out.mean = stats.mean;
    out.standard_error = stats.standard_error;
    return out;
}

double bmo_estimate(const Field& z_field, const Problem& p, std::span<const Control> scenarios,
                    std::size_t n_paths, std::size_t nt, std::uint64_t seed) {
    if (scenarios.empty()) throw ConfigError("BMO estimate needs at least one scenario");
    const double dt = p.horizon / static_cast<double>(nt);
    const CounterRng rng(seed);
    double best = 0.0;
    // energy[path * nt + i] = Z_i^2 d<B>_i over step i
    std::vector<double> energy(n_paths * nt);
    for (const Control& control : scenarios) {
        check_request(p, control, n_paths, nt);
        parallel_for(0, n_paths, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t path = lo; path < hi; ++path) {
                double z_prev = 0.0;
                simulate_path(p, control, rng, path, nt, dt, [&](const StepState& s) {
                    if (s.step > 0) energy[path * nt + s.step - 1] = z_prev * z_prev * s.d_qv;
                    z_prev = z_field.interpolate(s.t, s.x);
                });
                // suffix sums: energy[i] becomes int_{t_i}^T Z^2 d<B>
                for (std::size_t i = nt - 1; i-- > 0;) energy[path * nt + i] += energy[path * nt + i + 1];
            }
        }, 256);
        std::vector<double> column(n_paths);
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t path = 0; path < n_paths; ++path) column[path] = energy[path * nt + i];
            best = std::max(best, pairwise_sum(column) / static_cast<double>(n_paths));
        }
    }
    return best;
}

}  // namespace gbsde
