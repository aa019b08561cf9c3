// Copyright 2026 The PulseForge Authors
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

namespace pulseforge {

/** Base class of every error raised by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** Operands disagree on spin count or a dense cap was exceeded. */
class DimensionError : public Error {
 public:
  using Error::Error;
};

/** Malformed textual input (Pauli notation, sequence or scenario files). */
class ParseError : public Error {
 public:
  using Error::Error;
};

/** A physical or structural precondition was violated. */
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/** An iterative solver failed to reach its tolerance. */
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/** The requested operation does not support the given sequence layout. */
class UnsupportedShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace pulseforge
