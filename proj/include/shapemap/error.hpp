#pragma once

#include <stdexcept>
#include <string>

namespace shapemap {

// Base for all library errors so callers can catch one type at the CLI edge.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer shape problems; messages name the offending axis.
struct DimensionError : Error {
    using Error::Error;
};

// Bad argument values (probabilities out of range, degenerate inputs, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Inconsistent configuration (presets, plans, schedules, architectures).
struct ConfigError : Error {
    using Error::Error;
};

// Corpus/manifest problems: malformed rows, missing files, fold leakage.
struct DataError : Error {
    using Error::Error;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace shapemap
