#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape mismatch, bad config value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The forward solver produced a non-finite value.
class BlowUpError : public Error {
 public:
  BlowUpError(std::size_t time_index, const std::string& what)
      : Error(what), time_index_(time_index) {}
  std::size_t time_index() const noexcept { return time_index_; }

 private:
  std::size_t time_index_;
};

class NonFiniteObjective : public Error {
 public:
  using Error::Error;
};

/// Relative error requested against an all-zero reference.
class ZeroReference : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcl
