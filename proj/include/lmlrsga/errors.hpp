#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmlrsga {

// Error taxonomy. The CLI maps each class onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a precondition (dimension mismatch, bad parameter).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration or batch schedule.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The requested operation is not supported by this game.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced somewhere in a computation. `index` is the
// offending vector entry when known.
class NumericalError : public Error {
 public:
  static constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

  explicit NumericalError(const std::string& what, std::size_t index = kNoIndex)
      : Error(index == kNoIndex ? what : what + " (index " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace lmlrsga
