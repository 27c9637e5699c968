#pragma once

#include <stdexcept>
#include <string>

namespace cdph {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shape mismatch between operands (non-square input, length mismatch, ...).
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Invalid parameter values (negative probabilities, bad row sums, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Numeric failure: singular solve, non-convergent iteration, zero pmf.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

/// Malformed input data: CSV parse errors, off-lattice observations, ...
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

} // namespace cdph
