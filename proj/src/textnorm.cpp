#include "courtside/textnorm.hpp"

#include <cctype>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "courtside/error.hpp"

namespace courtside {

namespace {

const icu::Normalizer2& nfkd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status) || instance == nullptr) {
    throw Error(ErrorCode::internal, "ICU NFKD unavailable");
  }
  return *instance;
}

bool is_apostrophe(UChar32 c) {
  switch (c) {
    case 0x0027:  // '
    case 0x0060:  // `
    case 0x00B4:  // acute accent
    case 0x02BB:
    case 0x02BC:
    case 0x2018:
    case 0x2019:
    case 0x201B:
    case 0x2032:
    case 0xFF07:
      return true;
    default:
      return false;
  }
}

bool is_joining_hyphen(UChar32 c) {
  return c == '-' || c == 0x00AD || c == 0x2010 || c == 0x2011 || c == 0xFE63 ||
         c == 0xFF0D;
}

// Letters that NFKD leaves as single non-ASCII code points.
const char* ascii_fold(UChar32 c) {
  switch (c) {
    case 0x00DF: return "ss";  // ß
    case 0x00E6: return "ae";  // æ
    case 0x00F0: return "d";   // ð
    case 0x00F8: return "o";   // ø
    case 0x00FE: return "th";  // þ
    case 0x0111: return "d";   // đ
    case 0x0131: return "i";   // dotless i
    case 0x0142: return "l";   // ł
    case 0x0153: return "oe";  // œ
    default: return nullptr;
  }
}

}  // namespace

std::string NormalizedText::joined() const { return join(words, " "); }

NormalizedText normalize(std::string_view text) {
  NormalizedText out;
  out.original = std::string(text);

  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString decomposed = nfkd().normalize(source, status);
  if (U_FAILURE(status)) decomposed = source;

  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.words.push_back(std::move(current));
      current.clear();
    }
  };

  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 c = decomposed.char32At(i);
    i += U16_LENGTH(c);

    if (u_getCombiningClass(c) != 0 || u_charType(c) == U_NON_SPACING_MARK) continue;
    if (is_apostrophe(c) || is_joining_hyphen(c)) continue;

    c = u_tolower(c);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(static_cast<char>(c));
    } else if (const char* folded = ascii_fold(c)) {
      current += folded;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string normalize_joined(std::string_view text) { return normalize(text).joined(); }

std::span<const std::string> tokenize_words(const NormalizedText& text) noexcept {
  return text.words;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

std::string join(std::span<const std::string> words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

}  // namespace courtside
