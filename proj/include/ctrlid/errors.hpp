#pragma once

#include <stdexcept>
#include <string>

namespace ctrlid {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes (see tools/ctrlid.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CSV rows, dataset invariants).
class DataError : public Error {
 public:
  using Error::Error;
};

// A point outside the declared domain box of a basis or plant.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A configuration value outside its valid range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The estimators found nothing to estimate from (e.g. all inputs coincide).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// A learning LP has no feasible point; the message carries the remediation.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// The simplex engine stopped without a verdict (iteration limit, breakdown).
class SolverError : public Error {
 public:
  using Error::Error;
};

// A stability bound was requested for a loop that is not certified.
class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctrlid
