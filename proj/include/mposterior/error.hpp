// Copyright 2026 The mposterior Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace mpost {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constructor or operation received parameters outside its contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A loss was evaluated at an (x, theta) pair outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A log-density or objective evaluated to a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// No sign change of the estimating equation inside the bracket.
class BracketingError : public Error {
 public:
  using Error::Error;
};

// The posterior hit the range cap before its tails became negligible, so
// moment-type functionals are unavailable (this is not a numeric overflow).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// The regression design matrix does not have full column rank.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, int deficient_columns)
      : Error(what), deficient_columns_(deficient_columns) {}
  int deficient_columns() const noexcept { return deficient_columns_; }

 private:
  int deficient_columns_;
};

// A functional needed a density value that is numerically zero.
class DegenerateDenominatorError : public Error {
 public:
  using Error::Error;
};

// A quantity is undefined for the given model (e.g. a score bound that was
// never declared).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

}  // namespace mpost
