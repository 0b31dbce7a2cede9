#include "courtside/error.hpp"

namespace courtside {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::config: return "configuration error";
    case ErrorCode::undefined_wer: return "undefined WER";
    case ErrorCode::no_lexicon: return "no lexicon";
    case ErrorCode::duplicate_entry: return "duplicate entry";
    case ErrorCode::disjointness: return "lexicon overlap";
    case ErrorCode::unknown_entry: return "unknown entry";
    case ErrorCode::id_mismatch: return "segment id mismatch";
    case ErrorCode::transport: return "transport error";
    case ErrorCode::asr: return "ASR error";
    case ErrorCode::chat: return "chat client error";
    case ErrorCode::validation: return "validation error";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace courtside
