#include "gbsde/problem.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gbsde/errors.hpp"

namespace gbsde {

namespace {

using nlohmann::json;

void require_vars(const Expr& e, unsigned allowed, const char* name, const char* signature) {
    if ((e.free_vars() & ~allowed) != 0) {
        throw ConfigError(std::string("coefficient '") + name + "' may only use " + signature +
                          ", got: " + e.to_string());
    }
}

const json& require_key(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(std::string("problem file: missing required key '") + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("problem file: '" + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("problem file: '" + key + "' must be finite");
    return d;
}

Expr as_expr(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("problem file: '" + key + "' must be an expression string");
    try {
        return parse(v.get<std::string>());
    } catch (const ParseError& e) {
        throw ConfigError("problem file: '" + key + "': " + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(std::string("problem file: unknown key '") + it.key() + "' in " + where);
    }
}

}  // namespace

void Problem::check() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon T must be positive and finite");
    if (!(domain.x_lo < domain.x_hi) || !std::isfinite(domain.x_lo) || !std::isfinite(domain.x_hi)) {
        throw ConfigError("domain requires finite x_lo < x_hi");
    }
    if (!std::isfinite(domain.x0)) throw ConfigError("domain x0 must be finite");
    constexpr unsigned tx = var_bit(Var::t) | var_bit(Var::x);
    constexpr unsigned txyz = tx | var_bit(Var::y) | var_bit(Var::z);
    require_vars(drift, tx, "b", "(t, x)");
    require_vars(qv_drift, tx, "h", "(t, x)");
    require_vars(volatility, tx, "sigma", "(t, x)");
    require_vars(qv_generator, txyz, "f", "(t, x, y, z)");
    require_vars(time_generator, txyz, "g", "(t, x, y, z)");
    require_vars(terminal, var_bit(Var::x), "phi", "(x)");
    if (obstacle) require_vars(*obstacle, tx, "obstacle", "(t, x)");
    const AssumptionBounds& b = bounds;
    for (double v : {b.lipschitz_y, b.quadratic_z, b.data_bound, b.obstacle_bound, b.growth_exponent,
                     b.lipschitz_x, b.sigma2_min, b.sigma2_max}) {
        if (std::isnan(v) || v < 0.0) throw ConfigError("assumption bounds must be nonnegative");
    }
    if (!std::isfinite(b.data_bound) || !std::isfinite(b.obstacle_bound)) {
        throw ConfigError("M_0 and N_0 must be finite");
    }
}

Problem problem_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("problem file: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("problem file: top level must be an object");
    reject_unknown(doc,
                   {"T", "sigma_low", "sigma_high", "b", "h", "sigma", "f", "g", "phi", "obstacle",
                    "bounds", "domain"},
                   "problem");

    const double sigma_low = as_number(require_key(doc, "sigma_low"), "sigma_low");
    const double sigma_high = as_number(require_key(doc, "sigma_high"), "sigma_high");
    Problem p{.horizon = as_number(require_key(doc, "T"), "T"),
              .band = [&] {
                  try {
                      return GCoefficients(sigma_low, sigma_high);
                  } catch (const DomainError& e) {
                      throw ConfigError(std::string("problem file: ") + e.what());
                  }
              }()};
    p.terminal = as_expr(require_key(doc, "phi"), "phi");
    if (doc.contains("b")) p.drift = as_expr(doc["b"], "b");
    if (doc.contains("h")) p.qv_drift = as_expr(doc["h"], "h");
    if (doc.contains("sigma")) p.volatility = as_expr(doc["sigma"], "sigma");
    if (doc.contains("f")) p.qv_generator = as_expr(doc["f"], "f");
    if (doc.contains("g")) p.time_generator = as_expr(doc["g"], "g");
    if (doc.contains("obstacle") && !doc["obstacle"].is_null()) {
        p.obstacle = as_expr(doc["obstacle"], "obstacle");
    }

    if (doc.contains("bounds")) {
        const json& b = doc["bounds"];
        if (!b.is_object()) throw ConfigError("problem file: 'bounds' must be an object");
        reject_unknown(b, {"L_y", "L_z", "M_0", "N_0", "m", "L_x", "eps", "K"}, "bounds");
        auto read = [&](const char* key, double& out) {
            if (b.contains(key)) out = as_number(b[key], std::string("bounds.") + key);
        };
        read("L_y", p.bounds.lipschitz_y);
        read("L_z", p.bounds.quadratic_z);
        read("M_0", p.bounds.data_bound);
        read("N_0", p.bounds.obstacle_bound);
        read("m", p.bounds.growth_exponent);
        read("L_x", p.bounds.lipschitz_x);
        read("eps", p.bounds.sigma2_min);
        read("K", p.bounds.sigma2_max);
    }
    if (doc.contains("domain")) {
        const json& d = doc["domain"];
        if (!d.is_object()) throw ConfigError("problem file: 'domain' must be an object");
        reject_unknown(d, {"x_lo", "x_hi", "x0"}, "domain");
        if (d.contains("x_lo")) p.domain.x_lo = as_number(d["x_lo"], "domain.x_lo");
        if (d.contains("x_hi")) p.domain.x_hi = as_number(d["x_hi"], "domain.x_hi");
        if (d.contains("x0")) p.domain.x0 = as_number(d["x0"], "domain.x0");
    }
    p.check();
    return p;
}

Problem load_problem(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open problem file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return problem_from_json(buf.str());
}

std::string problem_to_json(const Problem& p) {
    json doc;
    doc["T"] = p.horizon;
    doc["sigma_low"] = p.band.sigma_low();
    doc["sigma_high"] = p.band.sigma_high();
    doc["b"] = p.drift.to_string();
    doc["h"] = p.qv_drift.to_string();
    doc["sigma"] = p.volatility.to_string();
    doc["f"] = p.qv_generator.to_string();
    doc["g"] = p.time_generator.to_string();
    doc["phi"] = p.terminal.to_string();
    if (p.obstacle) doc["obstacle"] = p.obstacle->to_string();
    json b = json::object();
    auto put = [&](const char* key, double v) {
        if (std::isfinite(v)) b[key] = v;
    };
    put("L_y", p.bounds.lipschitz_y);
    put("L_z", p.bounds.quadratic_z);
    put("M_0", p.bounds.data_bound);
    put("N_0", p.bounds.obstacle_bound);
    put("m", p.bounds.growth_exponent);
    put("L_x", p.bounds.lipschitz_x);
    put("eps", p.bounds.sigma2_min);
    put("K", p.bounds.sigma2_max);
    doc["bounds"] = std::move(b);
    doc["domain"] = {{"x_lo", p.domain.x_lo}, {"x_hi", p.domain.x_hi}, {"x0", p.domain.x0}};
    return doc.dump();
}

}  // namespace gbsde
