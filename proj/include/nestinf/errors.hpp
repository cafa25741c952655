/*
   Copyright 2026 nestinf contributors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nestinf {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Containers whose lengths must agree do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Too few samples (or subjects) for the requested estimator.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Data that is formally valid but makes the estimator degenerate
/// (zero variance, perfect correlation, all-zero differences, ...).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient regression design.
class SingularDesignError : public Error {
 public:
  using Error::Error;
};

/// A SubjectEffect of the wrong kind was passed to a combiner.
class KindError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nestinf
