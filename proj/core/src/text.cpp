#include "hlc/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "hlc/error.hpp"

namespace hlc {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw Error(ErrorCode::ConfigError, "ICU NFC normalizer unavailable");
  }
  return *n;
}

icu::UnicodeString to_nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(s, status);
  if (U_FAILURE(status)) {
    return s;
  }
  return out;
}

bool is_hyphen(char32_t c) {
  return c == U'-' || c == 0x2010 || c == 0x2011;
}

}  // namespace

bool is_unicode_whitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c)) != 0;
}

bool is_token_char(char32_t c) {
  if (is_hyphen(c)) {
    return true;
  }
  if (is_unicode_whitespace(c)) {
    return false;
  }
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
  constexpr auto separators = U_GC_P_MASK | U_GC_S_MASK | U_GC_Z_MASK | U_GC_CC_MASK;
  return (mask & separators) == 0;
}

std::u32string to_code_points(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t c : code_points) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(c), error);
    if (error) {
      n = 0;
      U8_APPEND_UNSAFE(buf, n, 0xFFFD);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return out;
}

std::size_t code_point_length(std::string_view utf8) {
  return to_code_points(utf8).size();
}

std::string code_point_substr(std::string_view utf8, std::size_t start, std::size_t end) {
  const auto cps = to_code_points(utf8);
  if (start > end || end > cps.size()) {
    throw Error(ErrorCode::InvalidRequirement, "span out of range");
  }
  return to_utf8(std::u32string_view(cps).substr(start, end - start));
}

std::string trim(std::string_view s) {
  const auto cps = to_code_points(s);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && is_unicode_whitespace(cps[begin])) ++begin;
  while (end > begin && is_unicode_whitespace(cps[end - 1])) --end;
  return to_utf8(std::u32string_view(cps).substr(begin, end - begin));
}

std::string normalize_text(std::string_view s) {
  if (s.empty()) {
    return {};
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u = to_nfc(u);
  u.toLower(icu::Locale::getRoot());
  // Lowercasing can leave decomposed sequences behind.
  u = to_nfc(u);

  std::string lowered;
  u.toUTF8String(lowered);

  std::u32string collapsed;
  bool pending_space = false;
  for (char32_t c : to_code_points(lowered)) {
    if (is_unicode_whitespace(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) {
      collapsed.push_back(U' ');
      pending_space = false;
    }
    collapsed.push_back(c);
  }
  return to_utf8(collapsed);
}

}  // namespace hlc
