#pragma once

#include <stdexcept>
#include <string>

namespace sarcf {

// Malformed data passed into an operation (non-finite input, dimension
// mismatch, rank-deficient regressors, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A configuration value outside its admissible range (k >= N, p outside
// (0,1), negative decay, ...).
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed: iteration did not converge, a
// factorization produced an unusable result, a residual check tripped.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The model leaves its validity region, e.g. |rho| * spectral_radius(W)
// too close to 1 for (I - rho W) to be safely invertible.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A Monte Carlo experiment could not produce usable output (every
// replication flagged).
class ExperimentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sarcf
