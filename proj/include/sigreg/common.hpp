#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sigreg {

inline constexpr const char* kVersion = "0.1.0";

// Invalid option / parameter combinations. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data. CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested problem size exceeds the coefficient budget (or overflows).
// CLI exit code 4.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically unsolvable system (singular normal equations at lambda = 0,
// covariance factorization failure, ...). CLI exit code 1 like any other
// runtime failure; kept distinct so tests can assert on the cause.
class ConditioningError : public std::runtime_error {
public:
    explicit ConditioningError(const std::string& msg) : std::runtime_error(msg) {}
};

// Process-wide cap on the number of signature coefficients a single feature
// vector may hold. Any shape whose flat length would exceed this throws
// CapacityError before memory is touched. The CLI maps --budget and the
// SIGREG_BUDGET environment variable onto this.
std::size_t coefficient_budget();
void set_coefficient_budget(std::size_t budget);

}  // namespace sigreg
