// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace icare {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wire-level failure while encoding or decoding a message.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A decode failure attributable to one field of a delimited line.
/// Field positions are zero-based, the kind tag is field 0.
class DecodeError : public ProtocolError {
 public:
  DecodeError(std::size_t field, const std::string& what)
      : ProtocolError("field " + std::to_string(field) + ": " + what), field_(field) {}

  std::size_t field() const noexcept { return field_; }

 private:
  std::size_t field_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class AuthError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Error in a structured text document, carrying the 1-based source line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace icare
