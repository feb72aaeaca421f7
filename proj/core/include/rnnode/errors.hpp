#pragma once

#include <stdexcept>
#include <string>

namespace rnnode {

// Base of everything the library throws on contract violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise out-of-domain numeric input.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class InvertibilityError : public Error {
 public:
  using Error::Error;
};

class InteriorViolationError : public Error {
 public:
  using Error::Error;
};

// An integrated state left the finite region; `time()` is the first grid
// time at which the bad state was produced.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace rnnode
