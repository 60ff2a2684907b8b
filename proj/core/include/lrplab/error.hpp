// Copyright 2026 The lrplab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace lrplab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error("invalid config field '" + field + "': " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class LoadErrorKind { kMissingFile, kParse, kDimension };

class LoadError : public Error {
 public:
  LoadError(LoadErrorKind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  LoadErrorKind kind() const noexcept { return kind_; }

 private:
  LoadErrorKind kind_;
};

// Dimension or layout mismatch between two objects that must agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Raised when training produces a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& message)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " +
              message),
        epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed. Wraps the underlying message with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "' failed: " + message),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace lrplab
