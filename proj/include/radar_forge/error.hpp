// Copyright 2026, radar-forge contributors
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

namespace radar_forge {

enum class ErrorKind {
  ZeroVector,
  BehindCamera,
  NonRigidTransform,
  InvalidIntrinsics,
  InsufficientData,
  EmptyPointSet,
  DimensionMismatch,
  EmptyInput,
  NonPositiveCount,
  AllZeroGrid,
  InvalidGrid,
  OutOfRange,
  EmptyNeighborhood,
  AnchorOutOfImage,
  ShapeMismatch,
  NonFinite,
  LengthMismatch,
  DegenerateRange,
  EmptyDataset,
  NoGroundTruth,
  EmptyLidar,
  ParseError,
  TruncatedFile,
  UnsupportedFormat,
  CorruptHeader,
  RangeViolation,
  FrameIdMismatch,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::NonRigidTransform: return "NonRigidTransform";
    case ErrorKind::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::EmptyPointSet: return "EmptyPointSet";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonPositiveCount: return "NonPositiveCount";
    case ErrorKind::AllZeroGrid: return "AllZeroGrid";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorKind::AnchorOutOfImage: return "AnchorOutOfImage";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateRange: return "DegenerateRange";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::NoGroundTruth: return "NoGroundTruth";
    case ErrorKind::EmptyLidar: return "EmptyLidar";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptHeader: return "CorruptHeader";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::FrameIdMismatch: return "FrameIdMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace radar_forge
