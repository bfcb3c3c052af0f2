// Copyright 2026 The sbtts Authors
// SPDX-License-Identifier: Apache-2.0
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

namespace sbtts {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kConfig,         // bad configuration value or unsupported option
  kStructural,     // inconsistent shapes, lengths or indices
  kDecomposition,  // signal too short for the requested wavelet depth
  kFrontEnd,       // out-of-vocabulary word or unknown phoneme
  kIngestion,      // malformed alignment, manifest or checkpoint content
  kIo,             // file system or codec failure
  kNumerical,      // non-finite values during training or generation
  kGeneration,     // incremental generator state went out of sync
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define SBTTS_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

SBTTS_DEFINE_ERROR(ConfigError, kConfig)
SBTTS_DEFINE_ERROR(StructuralError, kStructural)
SBTTS_DEFINE_ERROR(DecompositionError, kDecomposition)
SBTTS_DEFINE_ERROR(FrontEndError, kFrontEnd)
SBTTS_DEFINE_ERROR(IngestionError, kIngestion)
SBTTS_DEFINE_ERROR(IoError, kIo)
SBTTS_DEFINE_ERROR(NumericalError, kNumerical)
SBTTS_DEFINE_ERROR(GenerationError, kGeneration)

#undef SBTTS_DEFINE_ERROR

}  // namespace sbtts
