#pragma once

#include <stdexcept>
#include <string>

namespace fnelearn {

// Base of every error thrown by the library. Callers that only care about
// "something in fnelearn failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

class OutsideHull : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class NotNonexpansive : public Error {
 public:
  using Error::Error;
};

class NodeMismatch : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class ScaleExceeded : public Error {
 public:
  using Error::Error;
};

class StepSizeViolation : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

// A linear-map handle whose declared norm bound is below its measured norm.
class InvalidHandle : public Error {
 public:
  using Error::Error;
};

// Configuration values outside their documented domain.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fnelearn
