#pragma once

#include <stdexcept>
#include <string>

namespace risctl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape/precondition violations on API boundaries.
struct ContractViolation : Error {
    using Error::Error;
};

// Coincident positions, non-positive distances and the like.
struct DegenerateGeometry : Error {
    using Error::Error;
};

// Zero-norm block hit during a torus projection.
struct SingularProjection : Error {
    using Error::Error;
};

// Malformed input file; message carries the offending row index.
struct ParseError : Error {
    using Error::Error;
};

// Invalid experiment configuration; message lists the bad fields.
struct ConfigError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace risctl
