// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fieldsplat {

// Error codes double as the machine-readable "code" field emitted by the
// CLI on stderr, so they are stable strings rather than an enum.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr const char* kOutOfImage = "OutOfImage";
inline constexpr const char* kNonUnitQuaternion = "NonUnitQuaternion";
inline constexpr const char* kDegenerateRay = "DegenerateRay";
inline constexpr const char* kEmptyBatch = "EmptyBatch";
inline constexpr const char* kShapeMismatch = "ShapeMismatch";
inline constexpr const char* kNoSurface = "NoSurface";
inline constexpr const char* kTooFewPoints = "TooFewPoints";
inline constexpr const char* kMalformedRegion = "MalformedRegion";
inline constexpr const char* kUnknownId = "UnknownId";
inline constexpr const char* kDegenerateSpec = "DegenerateSpec";
inline constexpr const char* kTooSmall = "TooSmall";
inline constexpr const char* kInvalidArgument = "InvalidArgument";
inline constexpr const char* kFileNotFound = "FileNotFound";
inline constexpr const char* kParseError = "ParseError";
inline constexpr const char* kFormatError = "FormatError";
inline constexpr const char* kSchemaError = "SchemaError";
}  // namespace errc

}  // namespace fieldsplat
