/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace geomatch {

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad size, out-of-range value).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing input data: files, JSON documents, NPY headers.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The computation itself broke down (degenerate descriptors, NaN losses).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace geomatch
