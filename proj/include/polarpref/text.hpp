#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace polarpref::text {

/// Version tag for the tokenizer below. Reports and NIDF caches record it so
/// that numbers produced under a different tokenizer are never mixed.
inline constexpr std::string_view kTokenizerVersion = "ws-punct-v1";

/// Unicode NFC normalization of a UTF-8 string. Invalid UTF-8 sequences are
/// replaced with U+FFFD.
std::string nfc(std::string_view utf8);

/// Trims Unicode white space from both ends.
std::string trim(std::string_view utf8);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t scalar_count(std::string_view utf8);

/// NFC, lowercase, split on white space, strip leading/trailing punctuation
/// from each piece and drop pieces that end up empty. Interior punctuation
/// ("it's", "e-mail") is kept.
std::vector<std::string> tokenize(std::string_view utf8);

/// NFC and full Unicode lowercase; no splitting.
std::string lower(std::string_view utf8);

/// Collapses white-space runs to one ASCII space and trims.
std::string squeeze_whitespace(std::string_view utf8);

}  // namespace polarpref::text
