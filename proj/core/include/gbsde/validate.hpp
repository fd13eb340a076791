#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gbsde/problem.hpp"

namespace gbsde {

/// Sample point (and, for difference quotients, its partner) at which a
/// check attained its worst value.
struct Witness {
    double t = 0.0, x = 0.0, y = 0.0, z = 0.0;
    std::optional<double> partner;  // the other coordinate of a difference quotient
};

struct AssumptionCheck {
    std::string id;           // e.g. "H3.z"
    std::string description;
    bool pass = true;
    double worst = 0.0;       // worst sampled value of the checked quantity
    double bound = 0.0;       // declared bound it is compared with
    std::optional<Witness> witness;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;

    bool passed() const;
    const AssumptionCheck* find(const std::string& id) const;
    void print(std::ostream& os) const;
};

struct ValidationOptions {
    std::size_t sample_density = 9;  // points per axis, >= 2
    double y_half_width = 2.0;       // y sampled in [-w, w]
    double z_half_width = 2.0;       // z sampled in [-w, w]
};

/// Sampled necessary-condition check of the declared bounds on a lattice
/// of (t, x, y, z) points inside the truncation box. A pass is evidence,
/// not proof. Never throws for failed assumptions; those become report
/// entries. Throws ConfigError if sample_density < 2.
ValidationReport validate(const Problem& p, const ValidationOptions& options);
ValidationReport validate(const Problem& p, std::size_t sample_density);

}  // namespace gbsde
