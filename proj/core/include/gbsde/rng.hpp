#pragma once

#include <cstdint>

namespace gbsde {

/// Counter-based generator: every draw is a pure function of
/// (seed, path, step), so paths can be simulated in any order or on any
/// number of threads and still reproduce bit for bit.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t path, std::uint64_t step) const;
    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t path, std::uint64_t step) const;
    /// Standard normal by inverse-CDF transform of uniform().
    double normal(std::uint64_t path, std::uint64_t step) const;

private:
    std::uint64_t seed_;
};

}  // namespace gbsde
