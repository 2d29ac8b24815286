// Copyright 2026 The xling Authors.
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

#ifndef XLING_ERROR_H_
#define XLING_ERROR_H_

#include <stdexcept>
#include <string>

namespace xling {

// Base class for all library errors. The CLI maps each subclass onto a
// process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or a violated precondition (exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Filesystem or socket failure (exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

// The requested pretraining-set selection has no feasible solution (exit 3).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace xling

#endif  // XLING_ERROR_H_
