/*
 * Copyright 2026 The dualex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace dualex {

// Base of every exception the library throws. Subclasses map onto the CLI
// exit codes: ConfigError / InvalidInput / IngestionError are usage problems
// (exit 2), everything else is a runtime failure (exit 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class PredictorIoError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Raised when a computation has no meaningful answer for the given data,
// e.g. normalising coefficients that sum to zero.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace dualex
