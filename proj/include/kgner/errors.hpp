// Copyright 2026 The kgner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace kgner {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TemplateError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Anything that went wrong talking to a remote service. Maps to exit code 2.
class TransportError : public Error {
 public:
  using Error::Error;
};

// A single failed provider call. `retryable` separates throttling and server
// faults from rejections that will fail the same way on every attempt.
class ProviderError : public TransportError {
 public:
  ProviderError(const std::string& what, bool retryable, int status = 0)
      : TransportError(what), retryable_(retryable), status_(status) {}

  bool retryable() const { return retryable_; }
  int status() const { return status_; }

 private:
  bool retryable_;
  int status_;
};

}  // namespace kgner
