#pragma once

#include <stdexcept>
#include <string>

namespace memsyn {

// Bad argument or violated precondition (non-finite voltage, dt < 0, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Time outside a waveform's domain.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulation or protocol could not complete (e.g. pre-conditioning did not converge).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every restart of a fit produced a non-finite loss.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace memsyn
