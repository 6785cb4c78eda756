#ifndef QLT_ERRORS_HPP
#define QLT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qlt {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Incompatible matrix/vector dimensions or malformed shapes.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string &msg) : Error(msg) {}
};

// Physical-model violations: probabilities far outside [0,1], non-PSD
// operators beyond tolerance, broken completeness relations.
class ModelViolationError : public Error {
public:
  explicit ModelViolationError(const std::string &msg) : Error(msg) {}
};

// Numerical breakdowns: singular systems, non-finite values, divergence.
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &msg) : Error(msg) {}
};

} // namespace qlt

#endif
