// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace planrl {

// Invalid sizes, bad config values, unusable flag combinations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed files, unparseable logs, shape mismatches.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken caller contract: misaligned lengths, empty grammar masks.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Non-finite values where finite ones are required.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace planrl
