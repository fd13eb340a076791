#pragma once

#include <string>

#include "gbsde/problem.hpp"

namespace gbsde::testing {

inline std::string problem_path(const std::string& name) { return std::string(GBSDE_PROBLEM_DIR) + "/" + name; }

inline Problem problem_file(const std::string& name) { return load_problem(problem_path(name)); }

// Problem from a JSON fragment; T, band and phi default to the G-heat setup.
inline Problem make_problem(const std::string& extra, const std::string& phi = "x^2", double lo = 0.5,
                            double hi = 1.0) {
    std::string text = "{\"T\": 1, \"sigma_low\": " + std::to_string(lo) + ", \"sigma_high\": " +
                       std::to_string(hi) + ", \"phi\": \"" + phi + "\"";
    if (!extra.empty()) text += ", " + extra;
    text += "}";
    return problem_from_json(text);
}

}  // namespace gbsde::testing
