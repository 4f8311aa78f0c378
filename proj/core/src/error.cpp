#include "pvmark/error.hpp"

namespace pvmark {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroInverse: return "ZeroInverse";
    case ErrorCode::kNonCanonicalEncoding: return "NonCanonicalEncoding";
    case ErrorCode::kArityUnsupported: return "ArityUnsupported";
    case ErrorCode::kPromptTooShort: return "PromptTooShort";
    case ErrorCode::kVocabTooSmall: return "VocabTooSmall";
    case ErrorCode::kMsgShapeMismatch: return "MsgShapeMismatch";
    case ErrorCode::kTextTooShort: return "TextTooShort";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kRangeTooWide: return "RangeTooWide";
    case ErrorCode::kFusionUnavailable: return "FusionUnavailable";
    case ErrorCode::kOddContextWidth: return "OddContextWidth";
    case ErrorCode::kMissingOpening: return "MissingOpening";
    case ErrorCode::kChunkSizeMismatch: return "ChunkSizeMismatch";
    case ErrorCode::kTranscriptTruncated: return "TranscriptTruncated";
    case ErrorCode::kLookupNotFoldable: return "LookupNotFoldable";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace pvmark
