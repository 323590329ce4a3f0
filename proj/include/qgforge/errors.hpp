// Copyright 2026 The qgforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qgforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid corpus content; the message carries row-level diagnostics.
class CorpusError : public Error {
 public:
  using Error::Error;
};

// Raised by endpoints. Transient failures (connection refused, 5xx) are
// retried by the callers that own a retry budget.
class EndpointError : public Error {
 public:
  EndpointError(const std::string& what, bool transient)
      : Error(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

// Model output or prompt text that does not follow the expected layout.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw = {})
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// A pipeline stage was invoked before the stage that produces its input.
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

}  // namespace qgforge
