#pragma once

#include <stdexcept>
#include <string>

namespace elmrules {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or request; the CLI maps these to exit code 2,
// everything else derived from Error exits with 1.
struct ConfigError : Error {
    using Error::Error;
};

struct MalformedCsv : Error {
    using Error::Error;
};

// CSV row whose cell count differs from the header.
struct RaggedRow : MalformedCsv {
    using MalformedCsv::MalformedCsv;
};

// Label column value outside {-1, +1}.
struct InvalidLabel : MalformedCsv {
    using MalformedCsv::MalformedCsv;
};

// Zero-variance feature cannot be z-scored.
struct ConstantFeature : Error {
    using Error::Error;
};

struct BadFoldSpec : ConfigError {
    using ConfigError::ConfigError;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonFiniteInput : Error {
    using Error::Error;
};

// ROC is undefined when only one class is present.
struct DegenerateRoc : Error {
    using Error::Error;
};

// Prefault power-flow Newton iteration failed to converge.
struct NoEquilibrium : Error {
    using Error::Error;
};

// More than half of the drawn scenarios were rejected.
struct BadScenarioSpace : Error {
    using Error::Error;
};

// Trajectory does not reach the last feature sampling instant.
struct HorizonTooShort : Error {
    using Error::Error;
};

}  // namespace elmrules
