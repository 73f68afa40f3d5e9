#pragma once

#include <stdexcept>
#include <string>

namespace fedfs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (shape, range, empty input).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed update message (bitmap/probability list disagreement, truncated bytes).
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Client/server disagreement, e.g. a client with a different feature count.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Bad input file: ragged CSV rows, non-numeric cells, missing label column.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace fedfs
