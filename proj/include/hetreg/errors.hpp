#pragma once

#include <stdexcept>
#include <string>

namespace hetreg {

// Root of the library's exception hierarchy. The CLI maps config_error and
// dimension_error to usage failures and everything else to numeric failures.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct dimension_error : error {
    using error::error;
};

struct range_error : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

struct domain_error : error {
    using error::error;
};

struct numeric_error : error {
    using error::error;
};

}  // namespace hetreg
