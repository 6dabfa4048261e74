#pragma once

#include <stdexcept>
#include <string>

namespace cotrap {

/// Invalid physical input (non-positive mass, out-of-range parameter, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The dynamics left the domain where the model is valid (e.g. |tau| -> 1).
class PhysicsError : public std::runtime_error {
 public:
  PhysicsError(const std::string& what, double t)
      : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace cotrap
