#pragma once

#include <stdexcept>
#include <string>

namespace dfsq {

// Common base so the CLI boundary can catch the whole family at once.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller-supplied argument violates a precondition (non-positive scale,
// K < 3, negative weight, ...).
class invalid_parameter : public error {
public:
    using error::error;
};

// A data value that cannot be processed (NaN fed to encode, index out of range).
class invalid_input : public error {
public:
    using error::error;
};

// The requested point density cannot be normalized (divergent integral).
class design_infeasible : public error {
public:
    using error::error;
};

// A theoretical distortion integral diverges; the high-resolution limit does
// not exist for this (source, computation, design) triple.
class theory_undefined : public error {
public:
    using error::error;
};

// A Monte Carlo estimator could not produce a value.
class estimation_failure : public error {
public:
    using error::error;
};

// An ordering that must hold up to noise was violated beyond noise.
class internal_inconsistency : public error {
public:
    using error::error;
};

} // namespace dfsq
