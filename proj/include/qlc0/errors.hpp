#pragma once

#include <stdexcept>
#include <string>

namespace qlc0 {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
 public:
  explicit error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data (bad circuit, non-density input, ...).
class validation_error : public error {
 public:
  using error::error;
};

/// An argument is outside its documented range.
class argument_error : public error {
 public:
  using error::error;
};

/// The requested computation would exceed the configured qubit ceiling.
class capacity_error : public error {
 public:
  using error::error;
};

/// A documented precondition on operation inputs does not hold.
class precondition_error : public error {
 public:
  using error::error;
};

/// Matrix expected to be positive semi-definite is not (beyond tolerance).
class not_psd_error : public error {
 public:
  using error::error;
};

/// Operator norm exceeds the admissible bound for the operation.
class norm_error : public error {
 public:
  using error::error;
};

/// A supplied local-inversion candidate failed its certificate check.
class invalid_inversion_error : public error {
 public:
  using error::error;
};

/// The requested accuracy cannot be met within the configured sample budget.
class infeasibility_error : public error {
 public:
  using error::error;
};

/// File system or serialization failure.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace qlc0
