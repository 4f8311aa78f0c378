#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pvmark {

enum class ErrorCode {
  kZeroInverse,
  kNonCanonicalEncoding,
  kArityUnsupported,
  kPromptTooShort,
  kVocabTooSmall,
  kMsgShapeMismatch,
  kTextTooShort,
  kInvalidParams,
  kIndexOutOfRange,
  kShapeMismatch,
  kRangeTooWide,
  kFusionUnavailable,
  kOddContextWidth,
  kMissingOpening,
  kChunkSizeMismatch,
  kTranscriptTruncated,
  kLookupNotFoldable,
  kParseError,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pvmark
