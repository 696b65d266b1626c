// Copyright 2026 The Fairgrade Authors.
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

#ifndef FAIRGRADE_ERRORS_H_
#define FAIRGRADE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fairgrade {

// Base class of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied parameter is outside its documented range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input data does not parse under the declared format.
class DataFormatError : public Error {
 public:
  DataFormatError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line) {}

  // 1-based line number, or 0 when the error is not tied to a line.
  int line() const { return line_; }

 private:
  int line_;
};

// A merit was requested for a vertex the merit vector does not cover.
class MissingMeritError : public Error {
 public:
  using Error::Error;
};

// A student has no assigned question, so no grade is defined.
class ZeroDegreeError : public Error {
 public:
  using Error::Error;
};

// Base class for failures of the numerical routines.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The vertex set handed to the maximum-likelihood fitter is not strongly
// connected, so the MLE does not exist or is not unique.
class NotStronglyConnectedError : public NumericError {
 public:
  using NumericError::NumericError;
};

// An exact enumeration was requested on an instance that is too large.
class InstanceTooLargeError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairgrade

#endif  // FAIRGRADE_ERRORS_H_
