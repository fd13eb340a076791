#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gbsde {

/// Argument outside the mathematical domain of an operation (non-finite
/// input, q <= 1, volatility level outside the band, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed configuration: CFL violation, infeasible lattice, bad problem
/// file, inconsistent grid parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Syntax error in a coefficient expression, located by byte offset.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::string expected, std::string found);

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }

private:
    std::size_t offset_;
    std::string expected_;
    std::string found_;
};

/// Expression evaluation failure: unbound variable, log/sqrt of a negative
/// number, division by zero, non-finite result.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver produced a non-finite value.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t layer);

    std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

}  // namespace gbsde
