#pragma once

#include <stdexcept>
#include <string>

namespace jndq {

// Bad options, thresholds, or flag combinations.  CLI maps this to exit 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data violating a dataset invariant.  CLI maps this to exit 4.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace jndq
