#pragma once

#include <stdexcept>
#include <string>

namespace bellpost {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ScenarioMismatch : public Error {
 public:
  using Error::Error;
};

// A behavior failed the normalization or positivity check.
class InvalidBehavior : public Error {
 public:
  using Error::Error;
};

// An operation that requires a non-signaling input received a signaling one.
class SignalingInput : public Error {
 public:
  using Error::Error;
};

// Functional still carries symbolic marginal terms where a concrete one is required.
class SymbolicFunctional : public Error {
 public:
  using Error::Error;
};

// Post-selection on coincident clicks has zero probability at some setting pair,
// so the conditional distribution is undefined there.
class DegeneratePostselection : public Error {
 public:
  DegeneratePostselection(int x, int y)
      : Error("degenerate post-selection: zero coincidence probability at setting pair (x=" +
              std::to_string(x) + ", y=" + std::to_string(y) + ")"),
        x_(x),
        y_(y) {}

  int x() const noexcept { return x_; }
  int y() const noexcept { return y_; }

 private:
  int x_;
  int y_;
};

}  // namespace bellpost
