#pragma once
#include <stdexcept>

namespace qglab {

// Thrown on malformed inputs (bad config, dimension mismatch, invalid parameters).
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a numerical routine cannot meet its accuracy contract
// (no bracketed root, eigenvalue collision, solver divergence).
// The CLI maps this to exit code 1.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}
