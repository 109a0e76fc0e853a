#pragma once

#include <stdexcept>
#include <string>

namespace efr {

// All library errors derive from efr::error so callers can catch the
// whole family at the CLI boundary and map it to a nonzero exit code.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : error {
    using error::error;
};

// Malformed or inconsistent input data (CSV schema, non-finite values).
struct data_error : error {
    using error::error;
};

struct grid_mismatch_error : error {
    using error::error;
};

struct insufficient_sample_error : error {
    using error::error;
};

// Every kernel weight vanished at the requested bandwidth.
struct empty_neighborhood_error : error {
    using error::error;
};

// Bandwidth selection could not produce a usable value.
struct selection_error : error {
    using error::error;
};

} // namespace efr
