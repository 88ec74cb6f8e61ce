// Copyright 2026 The collapse-lab Authors
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
#include <string_view>

namespace collapse_lab {

enum class ErrorCode {
  InvalidGrid,
  InvalidArgument,
  GridTooCoarse,
  SupportClipped,
  Unsupported,
  ZeroField,
  OutOfDomain,
  FresnelUnresolved,
  KernelAliased,
  GridMismatch,
  NonPowerOfTwoGrid,
  TooFewSnapshots,
  NonUniformStride,
  OverlappingGrains,
  GrainTooNarrow,
  GrainNotFlat,
  AlreadyTriggered,
  DegeneratePartition,
  NonPositiveInput,
  AllZeroWeights,
  ExpectedCountTooSmall,
  Config,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::SupportClipped: return "SupportClipped";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::FresnelUnresolved: return "FresnelUnresolved";
    case ErrorCode::KernelAliased: return "KernelAliased";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonPowerOfTwoGrid: return "NonPowerOfTwoGrid";
    case ErrorCode::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorCode::NonUniformStride: return "NonUniformStride";
    case ErrorCode::OverlappingGrains: return "OverlappingGrains";
    case ErrorCode::GrainTooNarrow: return "GrainTooNarrow";
    case ErrorCode::GrainNotFlat: return "GrainNotFlat";
    case ErrorCode::AlreadyTriggered: return "AlreadyTriggered";
    case ErrorCode::DegeneratePartition: return "DegeneratePartition";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::ExpectedCountTooSmall: return "ExpectedCountTooSmall";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace collapse_lab
