#pragma once

#include <stdexcept>
#include <string>

namespace sqmod {

// Error categories used across the library. The CLI maps these onto exit
// codes, so keep the hierarchy flat.

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an identity that must hold unconditionally fails; always a bug.
struct InvariantError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace sqmod
