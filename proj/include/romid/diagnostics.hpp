// Copyright 2026 The romid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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
#include <vector>

namespace romid {

// Base of every error the library throws for bad input. Internal invariant
// failures use InvariantError so the CLI can map them to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestError : public Error {
 public:
  IngestError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ParseError : public Error {
 public:
  // `position` is a 1-based line for line-oriented formats and a 0-based byte
  // offset for s-expressions; `unit` says which.
  enum class Unit { line, byte };

  ParseError(const std::string& what, std::size_t position, Unit unit = Unit::line)
      : Error(what + (unit == Unit::line ? " (line " : " (byte ") +
              std::to_string(position) + ")"),
        position_(position),
        unit_(unit) {}

  std::size_t position() const { return position_; }
  std::size_t line() const { return unit_ == Unit::line ? position_ : 0; }
  Unit unit() const { return unit_; }

 private:
  std::size_t position_;
  Unit unit_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Severity { info, warning, error };

const char* to_string(Severity s);

// Non-fatal finding about the input. `location` is a ROM-relative path,
// optionally suffixed with ":line".
struct Diagnostic {
  Severity severity = Severity::warning;
  std::string code;
  std::string message;
  std::string location;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
  friend auto operator<=>(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace romid
