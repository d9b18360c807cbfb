#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or batch dimensions do not match what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Operation requires a softmax-terminated model.
class UnsupportedHeadError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, double loss)
      : Error("training diverged at step " + std::to_string(step) +
              " (loss = " + std::to_string(loss) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Malformed file contents (bad magic, bad version, inconsistent header).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// File shorter than its header announces.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation received an empty dataset where data is required.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Raised by the harness with the failing scenario step; the original error is nested.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace tg
