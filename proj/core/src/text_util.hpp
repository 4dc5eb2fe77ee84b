#pragma once

#include <string>
#include <string_view>

namespace songcraft::text {

std::string Trim(std::string_view s);
/// ASCII lowercase; non-ASCII bytes pass through.
std::string Lower(std::string_view s);
std::u32string DecodeUtf8(std::string_view s);
std::size_t CodePointCount(std::string_view s);
/// The first `n` code points of `s`.
std::string PrefixCodePoints(std::string_view s, std::size_t n);
/// True when `needle` occurs in `haystack` bounded by non-alphanumerics.
bool ContainsWord(std::string_view haystack, std::string_view needle);
/// Replaces every occurrence of `from` with `to`.
std::string ReplaceAll(std::string s, std::string_view from, std::string_view to);

}  // namespace songcraft::text
