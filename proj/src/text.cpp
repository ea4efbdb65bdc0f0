#include "polarpref/text.hpp"

#include <stdexcept>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace polarpref::text {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || norm == nullptr) {
    throw std::runtime_error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  }
  return *norm;
}

icu::UnicodeString normalized(std::string_view utf8) {
  const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  UErrorCode status = U_ZERO_ERROR;
  const auto& norm = nfc_instance();
  if (norm.isNormalized(src, status) && U_SUCCESS(status)) return src;
  status = U_ZERO_ERROR;
  icu::UnicodeString out = norm.normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error(std::string("NFC normalization failed: ") + u_errorName(status));
  return out;
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

}  // namespace

std::string nfc(std::string_view utf8) { return to_utf8(normalized(utf8)); }

std::string trim(std::string_view utf8) {
  const auto s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  int32_t begin = 0;
  int32_t end = s.length();
  while (begin < end && is_space(s.char32At(begin))) begin = s.moveIndex32(begin, 1);
  while (end > begin) {
    const int32_t prev = s.moveIndex32(end, -1);
    if (!is_space(s.char32At(prev))) break;
    end = prev;
  }
  return to_utf8(s.tempSubStringBetween(begin, end));
}

std::string lower(std::string_view utf8) {
  icu::UnicodeString s = normalized(utf8);
  s.toLower(icu::Locale::getRoot());
  return to_utf8(s);
}

std::size_t scalar_count(std::string_view utf8) {
  const auto s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  return static_cast<std::size_t>(s.countChar32());
}

std::string squeeze_whitespace(std::string_view utf8) {
  const auto s = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
    const UChar32 c = s.char32At(i);
    if (is_space(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(u' '));
    pending_space = false;
    out.append(c);
  }
  return to_utf8(out);
}

std::vector<std::string> tokenize(std::string_view utf8) {
  icu::UnicodeString s = normalized(utf8);
  s.toLower(icu::Locale::getRoot());

  std::vector<std::string> tokens;
  const int32_t n = s.length();
  int32_t i = 0;
  while (i < n) {
    while (i < n && is_space(s.char32At(i))) i = s.moveIndex32(i, 1);
    if (i >= n) break;
    int32_t begin = i;
    while (i < n && !is_space(s.char32At(i))) i = s.moveIndex32(i, 1);
    int32_t end = i;

    while (begin < end && u_ispunct(s.char32At(begin))) begin = s.moveIndex32(begin, 1);
    while (end > begin) {
      const int32_t prev = s.moveIndex32(end, -1);
      if (!u_ispunct(s.char32At(prev))) break;
      end = prev;
    }
    if (begin < end) tokens.push_back(to_utf8(s.tempSubStringBetween(begin, end)));
  }
  return tokens;
}

}  // namespace polarpref::text
