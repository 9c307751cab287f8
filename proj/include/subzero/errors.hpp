// Copyright 2026 The Subzero Authors.
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

#ifndef SUBZERO_ERRORS_HPP_
#define SUBZERO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace subzero {

// Malformed or out-of-range arguments. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-convergence, non-finite losses, divergence. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A reproduced panel violated its acceptance check. Maps to CLI exit code 4.
class AcceptanceError : public std::runtime_error {
 public:
  explicit AcceptanceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace subzero

#endif  // SUBZERO_ERRORS_HPP_
