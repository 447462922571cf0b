//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/error.hpp"

namespace rigidflow {

const char *error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::kInvalidArgument:
    return "InvalidArgument";
  case ErrorCode::kParseError:
    return "ParseError";
  case ErrorCode::kAngleNearPi:
    return "AngleNearPi";
  case ErrorCode::kDisconnected:
    return "Disconnected";
  case ErrorCode::kDegenerate:
    return "Degenerate";
  case ErrorCode::kNotAGroup:
    return "NotAGroup";
  case ErrorCode::kNoValidAutomorphism:
    return "NoValidAutomorphism";
  case ErrorCode::kFrameUnlockable:
    return "FrameUnlockable";
  case ErrorCode::kPruningDiverged:
    return "PruningDiverged";
  case ErrorCode::kShapeMismatch:
    return "ShapeMismatch";
  case ErrorCode::kZeroSupport:
    return "ZeroSupport";
  case ErrorCode::kMaskedToken:
    return "MaskedToken";
  case ErrorCode::kMissingTableEntry:
    return "MissingTableEntry";
  case ErrorCode::kIoError:
    return "IoError";
  case ErrorCode::kFormatError:
    return "FormatError";
  }
  return "Unknown";
}

ParseError::ParseError(int line, const std::string &reason)
    : Error(ErrorCode::kParseError,
            "line " + std::to_string(line) + ": " + reason),
      line_(line), reason_(reason) { }

void fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

}  // namespace rigidflow
