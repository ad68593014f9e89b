#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hpf {

/// A value or configuration violates a documented invariant.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// TCP and hand coincide, so the approach direction is undefined.
class DegenerateGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A sample or record stream is malformed or out of order.
class StreamError : public std::runtime_error {
 public:
  StreamError(std::size_t index, const std::string& what)
      : std::runtime_error("record " + std::to_string(index) + ": " + what),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hpf
