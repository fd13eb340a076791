#include "gbsde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"

namespace gbsde {

Grid::Grid(double x_lo, double x_hi, std::size_t nx, std::size_t nt, double horizon)
    : x_lo_(x_lo), x_hi_(x_hi), nx_(nx), nt_(nt), horizon_(horizon) {
    if (!(x_lo < x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) {
        throw ConfigError("grid requires finite x_lo < x_hi");
    }
    if (nx < 3) throw ConfigError("grid requires nx >= 3 interior nodes");
    if (nt < 1) throw ConfigError("grid requires nt >= 1 time steps");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid requires a positive horizon");
    dx_ = (x_hi - x_lo) / static_cast<double>(nx + 1);
    dt_ = horizon / static_cast<double>(nt);
}

Grid::Grid(const Problem& p, const GridSpec& spec)
    : Grid(spec.x_lo.value_or(p.domain.x_lo), spec.x_hi.value_or(p.domain.x_hi), spec.nx, spec.nt,
           p.horizon) {
    if (!(spec.cfl_safety > 0.0) || spec.cfl_safety > 0.9) {
        throw ConfigError("cfl_safety must lie in (0, 0.9]");
    }
    cfl_safety_ = spec.cfl_safety;
    require_cfl(p);
}

double Grid::cfl_number(const Problem& p) const {
    const double var_high = p.band.var_high();
    double worst = 0.0;
    for (std::size_t i = 0; i <= nt_; ++i) {
        const double t = this->t(i);
        for (std::size_t j = 0; j < nodes(); ++j) {
            const double xj = x(j);
            const double s = p.volatility_at(t, xj);
            const double rate = var_high * s * s / (dx_ * dx_) +
                                (std::fabs(p.drift_at(t, xj)) + var_high * std::fabs(p.qv_drift_at(t, xj))) / dx_;
            worst = std::max(worst, rate * dt_);
        }
    }
    return worst;
}

void Grid::require_cfl(const Problem& p) const {
    const double c = cfl_number(p);
    if (c > cfl_safety_) {
        throw ConfigError("CFL violation: dt * rate = " + format_double(c) + " exceeds " +
                          format_double(cfl_safety_) + " (dt=" + format_double(dt_) +
                          ", dx=" + format_double(dx_) + "); increase nt or widen dx");
    }
}

Field::Field(Grid grid, double fill)
    : grid_(std::move(grid)), stride_(grid_.nodes()), values_((grid_.nt() + 1) * stride_, fill) {}

double Field::interpolate(std::size_t layer, double x) const {
    const double pos = std::clamp((x - grid_.x_lo()) / grid_.dx(), 0.0, static_cast<double>(stride_ - 1));
    const auto j = std::min(static_cast<std::size_t>(pos), stride_ - 2);
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * at(layer, j) + w * at(layer, j + 1);
}

double Field::interpolate(double t, double x) const {
    const double pos = std::clamp(t / grid_.dt(), 0.0, static_cast<double>(grid_.nt()));
    const auto i = std::min(static_cast<std::size_t>(pos), grid_.nt() - 1);
    const double w = pos - static_cast<double>(i);
    if (w == 0.0) return interpolate(i, x);
    return (1.0 - w) * interpolate(i, x) + w * interpolate(i + 1, x);
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Field::write_csv(std::ostream& os) const {
    os << "t,x,u\n";
    for (std::size_t i = 0; i <= grid_.nt(); ++i) {
        const std::string t = format_double(grid_.t(i));
        for (std::size_t j = 0; j < stride_; ++j) {
            os << t << ',' << format_double(grid_.x(j)) << ',' << format_double(at(i, j)) << '\n';
        }
    }
}

double max_abs_difference(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw ConfigError("fields live on different grids");
    double worst = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t k = 0; k < va.size(); ++k) worst = std::max(worst, std::fabs(va[k] - vb[k]));
    return worst;
}

}  // namespace gbsde
