// Copyright 2026 The mimoadv Authors
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

namespace mimoadv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that violate a documented precondition or cross-file compatibility.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file that cannot be parsed: bad magic, truncated payload, impossible sizes.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A well-formed file written with a schema version this build does not read.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling or resampling loops that ran out of attempts.
class SamplingError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace mimoadv
