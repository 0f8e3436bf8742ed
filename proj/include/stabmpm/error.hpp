#pragma once

#include <stdexcept>
#include <string>

namespace stabmpm {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent scene / run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class InvalidState : public Error {
public:
  using Error::Error;
};

class MetricError : public Error {
public:
  using Error::Error;
};

// GIMP influence domain wider than the one-cell stencil assumption allows.
class UnsupportedDomain : public Error {
public:
  using Error::Error;
};

class OutOfDomain : public Error {
public:
  using Error::Error;
};

// Failures that the time-step driver recovers from by cutting the step.
class StepFailure : public Error {
public:
  using Error::Error;
};

class SingularKinematics : public StepFailure {
public:
  using StepFailure::StepFailure;
};

class ElementInversion : public StepFailure {
public:
  using StepFailure::StepFailure;
};

class PorosityRange : public StepFailure {
public:
  using StepFailure::StepFailure;
};

class LinearSolveError : public StepFailure {
public:
  LinearSolveError(const std::string& what, long dof = -1) : StepFailure(what), dof_(dof) {}
  long dof() const { return dof_; }

private:
  long dof_;
};

class NonConvergence : public StepFailure {
public:
  using StepFailure::StepFailure;
};

}  // namespace stabmpm
