#include "gbsde/validate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>

#include "gbsde/errors.hpp"

namespace gbsde {

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const AssumptionCheck* ValidationReport::find(const std::string& id) const {
    for (const auto& c : checks) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

void ValidationReport::print(std::ostream& os) const {
    const auto old_precision = os.precision(6);
    for (const auto& c : checks) {
        os << (c.pass ? "[pass] " : "[FAIL] ") << std::left << std::setw(12) << c.id << ' '
           << c.description << ": worst=" << c.worst << " bound=" << c.bound;
        if (c.witness && !c.pass) {
            const Witness& w = *c.witness;
            os << " at (t=" << w.t << ", x=" << w.x << ", y=" << w.y << ", z=" << w.z;
            if (w.partner) os << ", partner=" << *w.partner;
            os << ')';
        }
        os << '\n';
    }
    os.precision(old_precision);
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

// Tracks the maximum of a sampled quantity and where it occurred.
class WorstTracker {
public:
    void offer(double value, const Witness& at) {
        if (!seen_ || value > worst_) {
            worst_ = value;
            witness_ = at;
            seen_ = true;
        }
    }
    bool seen() const { return seen_; }
    double worst() const { return worst_; }
    const Witness& witness() const { return witness_; }

private:
    bool seen_ = false;
    double worst_ = 0.0;
    Witness witness_;
};

AssumptionCheck upper_check(std::string id, std::string description, const WorstTracker& w, double bound) {
    AssumptionCheck c{std::move(id), std::move(description)};
    c.bound = bound;
    if (w.seen()) {
        c.worst = w.worst();
        // Sampled difference quotients carry rounding noise.
        c.pass = w.worst() <= bound + 1e-9 * std::max(1.0, std::fabs(bound));
        c.witness = w.witness();
    }
    return c;
}

struct Sampler {
    const Problem& p;
    std::vector<double> ts, xs, ys, zs;
    WorstTracker eval_failures;
    std::size_t failure_count = 0;

    // Evaluates fn, converting an EvalError into a recorded failure.
    std::optional<double> guarded(const std::function<double()>& fn, const Witness& at) {
        try {
            return fn();
        } catch (const EvalError&) {
            if (++failure_count == 1) eval_failures.offer(1.0, at);
            return std::nullopt;
        }
    }
};

}  // namespace

ValidationReport validate(const Problem& p, std::size_t sample_density) {
    ValidationOptions options;
    options.sample_density = sample_density;
    return validate(p, options);
}

ValidationReport validate(const Problem& p, const ValidationOptions& options) {
    const std::size_t d = options.sample_density;
    if (d < 2) throw ConfigError("validation needs at least 2 samples per axis");

    Sampler s{p,
              linspace(0.0, p.horizon, d),
              linspace(p.domain.x_lo, p.domain.x_hi, d),
              linspace(-options.y_half_width, options.y_half_width, d),
              linspace(-options.z_half_width, options.z_half_width, d)};
    const AssumptionBounds& bounds = p.bounds;
    ValidationReport report;

    // Data bound: int_0^T sup_x (f(.,0,0)^2 + g(.,0,0)^2) dt + sup |phi| <= M_0.
    {
        std::vector<double> sup_sq(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (double x : s.xs) {
                const Witness at{s.ts[i], x, 0.0, 0.0};
                auto f0 = s.guarded([&] { return p.qv_generator_at(s.ts[i], x, 0.0, 0.0); }, at);
                auto g0 = s.guarded([&] { return p.time_generator_at(s.ts[i], x, 0.0, 0.0); }, at);
                if (f0 && g0) sup_sq[i] = std::max(sup_sq[i], (*f0) * (*f0) + (*g0) * (*g0));
            }
        }
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < d; ++i) {
            integral += 0.5 * (sup_sq[i] + sup_sq[i + 1]) * (s.ts[i + 1] - s.ts[i]);
        }
        WorstTracker phi_sup;
        for (double x : s.xs) {
            const Witness at{p.horizon, x, 0.0, 0.0};
            if (auto v = s.guarded([&] { return p.terminal_at(x); }, at)) phi_sup.offer(std::fabs(*v), at);
        }
        WorstTracker combined;
        if (phi_sup.seen()) combined.offer(integral + phi_sup.worst(), phi_sup.witness());
        report.checks.push_back(upper_check(
            "A3", "int sup(f(.,0,0)^2+g(.,0,0)^2) dt + sup|phi| <= M_0", combined, bounds.data_bound));
    }

    // Non-degeneracy and boundedness of sigma^2.
    {
        WorstTracker low;   // tracks -sigma^2 so that max means smallest sigma^2
        WorstTracker high;
        for (double t : s.ts) {
            for (double x : s.xs) {
                const Witness at{t, x, 0.0, 0.0};
                if (auto v = s.guarded([&] { return p.volatility_at(t, x); }, at)) {
                    low.offer(-(*v) * (*v), at);
                    high.offer((*v) * (*v), at);
                }
            }
        }
        AssumptionCheck lo{"A4.lower", "sigma^2 >= eps"};
        lo.bound = bounds.sigma2_min;
        if (low.seen()) {
            lo.worst = -low.worst();
            lo.pass = lo.worst >= bounds.sigma2_min && lo.worst > 0.0;
            lo.witness = low.witness();
        }
        report.checks.push_back(lo);
        report.checks.push_back(upper_check("A4.upper", "sigma^2 <= K", high, bounds.sigma2_max));
    }

    // Lipschitz in y and quadratic growth in z for f and g, by difference
    // quotients between neighbouring sample points.
    {
        WorstTracker y_quot;
        WorstTracker z_quot;
        const std::array<const Expr*, 2> generators{&p.qv_generator, &p.time_generator};
        for (const Expr* gen : generators) {
            auto at = [&](double t, double x, double y, double z) {
                return s.guarded([&] { return gen->eval(Env::txyz(t, x, y, z)); }, Witness{t, x, y, z});
            };
            for (double t : s.ts) {
                for (double x : s.xs) {
                    for (std::size_t k = 0; k < d; ++k) {
                        for (std::size_t m = 0; m < d; ++m) {
                            const double y = s.ys[k];
                            const double z = s.zs[m];
                            const auto here = at(t, x, y, z);
                            if (!here) continue;
                            if (k + 1 < d) {
                                if (auto there = at(t, x, s.ys[k + 1], z)) {
                                    Witness w{t, x, y, z, s.ys[k + 1]};
                                    y_quot.offer(std::fabs(*there - *here) / (s.ys[k + 1] - y), w);
                                }
                            }
                            if (m + 1 < d) {
                                const double z2 = s.zs[m + 1];
                                if (auto there = at(t, x, y, z2)) {
                                    Witness w{t, x, y, z, z2};
                                    const double scale = (1.0 + std::fabs(z) + std::fabs(z2)) * (z2 - z);
                                    z_quot.offer(std::fabs(*there - *here) / scale, w);
                                }
                            }
                        }
                    }
                }
            }
        }
        report.checks.push_back(
            upper_check("H3.y", "|f,g(y)-f,g(y')| / |y-y'| <= L_y", y_quot, bounds.lipschitz_y));
        report.checks.push_back(upper_check("H3.z", "|f,g(z)-f,g(z')| / ((1+|z|+|z'|)|z-z'|) <= L_z",
                                            z_quot, bounds.quadratic_z));
    }

    // Lipschitz / polynomial growth in x, only when L_x is declared.
    if (std::isfinite(bounds.lipschitz_x)) {
        WorstTracker coeff_quot;
        WorstTracker phi_quot;
        const std::array<const Expr*, 3> forward{&p.drift, &p.qv_drift, &p.volatility};
        for (double t : s.ts) {
            for (std::size_t j = 0; j + 1 < d; ++j) {
                const double x = s.xs[j];
                const double x2 = s.xs[j + 1];
                double total = 0.0;
                bool ok = true;
                for (const Expr* c : forward) {
                    auto a = s.guarded([&] { return c->eval(Env::tx(t, x)); }, Witness{t, x});
                    auto b = s.guarded([&] { return c->eval(Env::tx(t, x2)); }, Witness{t, x2});
                    if (!a || !b) {
                        ok = false;
                        continue;
                    }
                    total += std::fabs(*b - *a);
                }
                if (ok) coeff_quot.offer(total / (x2 - x), Witness{t, x, 0.0, 0.0, x2});
            }
        }
        const double m = bounds.growth_exponent;
        for (std::size_t j = 0; j + 1 < d; ++j) {
            const double x = s.xs[j];
            const double x2 = s.xs[j + 1];
            auto a = s.guarded([&] { return p.terminal_at(x); }, Witness{p.horizon, x});
            auto b = s.guarded([&] { return p.terminal_at(x2); }, Witness{p.horizon, x2});
            if (a && b) {
                const double scale = (1.0 + std::pow(std::fabs(x), m) + std::pow(std::fabs(x2), m)) * (x2 - x);
                phi_quot.offer(std::fabs(*b - *a) / scale, Witness{p.horizon, x, 0.0, 0.0, x2});
            }
        }
        report.checks.push_back(
            upper_check("A2.coeff", "|b|+|h|+|sigma| x-difference quotient <= L", coeff_quot, bounds.lipschitz_x));
        report.checks.push_back(upper_check("A2.phi", "|phi(x)-phi(x')| / ((1+|x|^m+|x'|^m)|x-x'|) <= L",
                                            phi_quot, bounds.lipschitz_x));
    }

    if (p.obstacle) {
        WorstTracker terminal_gap;
        for (double x : s.xs) {
            const Witness at{p.horizon, x};
            auto l = s.guarded([&] { return p.obstacle_at(p.horizon, x); }, at);
            auto phi = s.guarded([&] { return p.terminal_at(x); }, at);
            if (l && phi) terminal_gap.offer(*l - *phi, at);
        }
        report.checks.push_back(upper_check("A9.terminal", "l(T,x) - phi(x) <= 0", terminal_gap, 0.0));

        WorstTracker upper;
        for (double t : s.ts) {
            for (double x : s.xs) {
                const Witness at{t, x};
                if (auto l = s.guarded([&] { return p.obstacle_at(t, x); }, at)) upper.offer(*l, at);
            }
        }
        report.checks.push_back(upper_check("A9.upper", "l(t,x) <= N_0", upper, bounds.obstacle_bound));
    }

    AssumptionCheck evals{"eval", "coefficients evaluate to finite values on the sample box"};
    evals.worst = static_cast<double>(s.failure_count);
    evals.bound = 0.0;
    evals.pass = s.failure_count == 0;
    if (s.eval_failures.seen()) evals.witness = s.eval_failures.witness();
    report.checks.push_back(evals);
    return report;
}

}  // namespace gbsde
