// Copyright 2026 The w2n Authors
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

#ifndef W2N_ERRORS_HPP_
#define W2N_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace w2n {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  LoadError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class TooShortError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Configuration disagreement between two components (e.g. vocoder vs. mel).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid network or training specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// A required external tool is not configured or not runnable.
class UnavailableError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised when a training loss becomes NaN or infinite.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(const std::string& component, double value)
      : Error("non-finite loss in component '" + component +
              "': " + std::to_string(value)),
        component_(component) {}
  const std::string& component() const { return component_; }

 private:
  std::string component_;
};

}  // namespace w2n

#endif  // W2N_ERRORS_HPP_
