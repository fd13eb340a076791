#include "gbsde/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "gbsde/csv.hpp"
#include "gbsde/errors.hpp"

namespace gbsde {

namespace {
// Band membership tolerance for levels computed as sqrt(v^2).
constexpr double kBandTol = 1e-12;
}

Scenario::Scenario(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
    if (breakpoints_.size() < 2 || levels_.size() + 1 != breakpoints_.size()) {
        throw DomainError("scenario needs k+1 breakpoints for k levels (k >= 1)");
    }
    if (breakpoints_.front() != 0.0) throw DomainError("scenario breakpoints must start at t = 0");
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
        if (!(breakpoints_[k] < breakpoints_[k + 1]) || !std::isfinite(breakpoints_[k + 1])) {
            throw DomainError("scenario breakpoints must be strictly increasing and finite");
        }
    }
    for (double v : levels_) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("scenario levels must be positive and finite");
    }
}

Scenario Scenario::constant(double level, double horizon) { return Scenario({0.0, horizon}, {level}); }

double Scenario::level_at(double t) const {
    const auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, t);
    return levels_[static_cast<std::size_t>(it - (breakpoints_.begin() + 1))];
}

FeedbackControl::FeedbackControl(std::size_t nt, double dt, double x_root, double dx, std::vector<double> levels)
    : nt_(nt), dt_(dt), x_root_(x_root), dx_(dx), levels_(std::move(levels)) {
    if (nt == 0 || levels_.size() != nt * nt) throw DomainError("feedback control needs nt^2 node levels");
    for (double v : levels_) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("feedback levels must be positive and finite");
    }
}

double FeedbackControl::level_at(double t, double x) const {
    const double layer_pos = std::clamp(std::round(t / dt_), 0.0, static_cast<double>(nt_ - 1));
    const auto layer = static_cast<std::size_t>(layer_pos);
    const double offset = std::round((x - x_root_) / dx_);
    const double k = std::clamp(offset + layer_pos, 0.0, 2.0 * layer_pos);
    return level_at_node(layer, static_cast<std::size_t>(k));
}

double control_level(const Control& c, double t, double x) {
    return std::visit(
        [&](const auto& ctl) {
            if constexpr (std::is_same_v<std::decay_t<decltype(ctl)>, Scenario>) {
                return ctl.level_at(t);
            } else {
                return ctl.level_at(t, x);
            }
        },
        c);
}

void require_in_band(const Control& c, const GCoefficients& band) {
    const std::span<const double> levels =
        std::visit([](const auto& ctl) { return ctl.levels(); }, c);
    for (double v : levels) {
        if (!band.contains(v, kBandTol * band.sigma_high())) {
            throw DomainError("volatility level " + format_double(v) + " outside band [" +
                              format_double(band.sigma_low()) + ", " + format_double(band.sigma_high()) + "]");
        }
    }
}

std::string describe(const Control& c) {
    if (const auto* s = std::get_if<Scenario>(&c)) {
        if (s->levels().size() == 1) return "const(" + format_double(s->levels()[0]) + ")";
        std::string out = "piecewise(";
        for (std::size_t k = 0; k < s->levels().size(); ++k) {
            if (k > 0) out += ";";
            out += format_double(s->levels()[k]) + "@" + format_double(s->breakpoints()[k]);
        }
        return out + ")";
    }
    return "feedback(nt=" + std::to_string(std::get<FeedbackControl>(c).nt()) + ")";
}

}  // namespace gbsde
