#pragma once

#include <stdexcept>
#include <string>

namespace kinoclear {

// Base for all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown names, nonpositive parameters, malformed scenario content.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Node-count cap exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class CertificateInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Primitive duration too small to leave any cell.
class DegenerateGraphError : public Error {
 public:
  using Error::Error;
};

class InvalidSourceError : public Error {
 public:
  using Error::Error;
};

class InvalidTargetError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

class UndefinedDistanceError : public Error {
 public:
  using Error::Error;
};

class NoObstacleError : public Error {
 public:
  using Error::Error;
};

class InadmissibleTrajectoryError : public Error {
 public:
  using Error::Error;
};

// Requested radius is finer than the lattice can resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinoclear
