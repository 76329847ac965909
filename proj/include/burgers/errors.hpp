#pragma once

#include <stdexcept>
#include <string>

namespace burgers {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map families of failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spectral core
class NonZeroMean : public Error {
 public:
  using Error::Error;
};
class UnresolvedField : public Error {
 public:
  using Error::Error;
};

// Solver
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double time, long realization = -1)
      : Error(what), time_(time), realization_(realization) {}
  double time() const { return time_; }
  long realization() const { return realization_; }

 private:
  double time_;
  long realization_;
};

// Observables
class WindowNotCovered : public Error {
 public:
  using Error::Error;
};
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};
class EmptyLayer : public Error {
 public:
  using Error::Error;
};
class ViscosityTooLarge : public Error {
 public:
  using Error::Error;
};

// Ensemble / analysis
class MissingObservable : public Error {
 public:
  using Error::Error;
};
class NonPositiveValue : public Error {
 public:
  using Error::Error;
};
class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Configuration (validated before any run starts)
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace burgers
