// Copyright 2026 The weakbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weakbound {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents. `offset` is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Record-level validation failure (1-based line number).
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Caller passed arguments outside an operation's domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Pipeline configuration is incomplete or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Required input data is missing or unusable.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Serialized model does not match what the reader expects.
class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakbound
