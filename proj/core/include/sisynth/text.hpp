#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sisynth {

std::string trim(std::string_view s);

/// Collapses every run of whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string to_lower_ascii(std::string_view s);

/// Lowercase with whitespace, hyphens and underscores removed; used for
/// lenient name matching ("Non-Suicidal" == "non suicidal").
std::string fold_key(std::string_view s);

/// Replaces typographic punctuation (curly quotes, dashes, ellipsis,
/// non-breaking spaces) with ASCII equivalents. Other code points pass
/// through unchanged.
std::string ascii_normalize(std::string_view s);

/// Number of code points; invalid bytes count as one each.
std::size_t utf8_length(std::string_view s);

/// Lowercased word tokens using Unicode word boundaries. Punctuation and
/// symbols are dropped, including apostrophes inside words ("can't" -> "cant").
std::vector<std::string> tokenize_words(std::string_view text);

}  // namespace sisynth
