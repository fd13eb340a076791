#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace gbsde {

/// 17 significant digits, enough to round-trip any double; artifacts
/// written with it are comparable byte for byte.
std::string format_double(double v);

/// Pairwise (cascade) summation; the result is independent of how the
/// terms were produced, only of their order.
double pairwise_sum(std::span<const double> values);

struct MeanAndError {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Sample mean and standard error of the mean (n-1 variance).
MeanAndError mean_and_error(std::span<const double> values);

/// 64-bit FNV-1a hash, used to tag reports with their configuration.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace gbsde
