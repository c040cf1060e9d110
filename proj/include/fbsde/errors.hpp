#pragma once

#include <stdexcept>

namespace fbsde {

// A finite difference transport run would be outside its stability region.
struct CflError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A cubature sweep would exceed the configured memory budget.
struct MemoryBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed, unknown or inconsistent configuration input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fbsde
