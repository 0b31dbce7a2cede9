#pragma once

#include <stdexcept>
#include <string>

namespace courtside {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  config,
  undefined_wer,
  no_lexicon,
  duplicate_entry,
  disjointness,
  unknown_entry,
  id_mismatch,
  transport,
  asr,
  chat,
  validation,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is what
/// the C API maps onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace courtside
