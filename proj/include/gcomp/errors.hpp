#pragma once

#include <stdexcept>
#include <string>

namespace gcomp {

/// Bad user input: malformed files, unknown columns, invalid options.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: singular systems, degenerate likelihoods, failed fits.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Weighted fit requested with too little effective sample to identify the
/// coefficients. Distinct type so EM can freeze a component instead of dying.
class InsufficientWeightError : public NumericError {
public:
    explicit InsufficientWeightError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace gcomp
