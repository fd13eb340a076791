#include "gbsde/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace gbsde {

namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t path, std::uint64_t step) const {
    std::uint64_t h = mix(seed_ + 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ (path * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
    h = mix(h ^ (step * 0xaef17502108ef2d9ULL + 0x632be59bd9b4e019ULL));
    return h;
}

double CounterRng::uniform(std::uint64_t path, std::uint64_t step) const {
    return (static_cast<double>(bits(path, step) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t path, std::uint64_t step) const {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform(path, step));
}

}  // namespace gbsde
