//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_ERROR_HPP_
#define RIGIDFLOW_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rigidflow {

// Values are mirrored one-to-one by rf_status in rigidflow.h.
enum class ErrorCode {
  kInvalidArgument = 1,
  kParseError = 2,
  kAngleNearPi = 3,
  kDisconnected = 4,
  kDegenerate = 5,
  kNotAGroup = 6,
  kNoValidAutomorphism = 7,
  kFrameUnlockable = 8,
  kPruningDiverged = 9,
  kShapeMismatch = 10,
  kZeroSupport = 11,
  kMaskedToken = 12,
  kMissingTableEntry = 13,
  kIoError = 14,
  kFormatError = 15,
};

const char *error_code_name(ErrorCode code);

class Error: public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) { }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class ParseError: public Error {
public:
  ParseError(int line, const std::string &reason);

  int line() const noexcept { return line_; }
  const std::string &reason() const noexcept { return reason_; }

private:
  int line_;
  std::string reason_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &what);

}  // namespace rigidflow

#endif  // RIGIDFLOW_ERROR_HPP_
