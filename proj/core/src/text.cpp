#include "sisynth/text.hpp"

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cctype>
#include <memory>
#include <optional>

#include "sisynth/error.hpp"

namespace sisynth {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes one UTF-8 sequence at s[i]. Returns the code point and its byte
// length, or nullopt for an invalid sequence.
std::optional<std::pair<char32_t, std::size_t>> decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return std::pair{static_cast<char32_t>(b0), std::size_t{1}};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (i + len > s.size()) return std::nullopt;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  return std::pair{cp, len};
}

const char* ascii_replacement(char32_t cp) {
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
      return "'";
    case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x2033:
      return "\"";
    case 0x2010: case 0x2011: case 0x2012: case 0x2013: case 0x2014:
    case 0x2015: case 0x2212:
      return "-";
    case 0x2026:
      return "...";
    case 0x00A0: case 0x2002: case 0x2003: case 0x2004: case 0x2005:
    case 0x2006: case 0x2007: case 0x2008: case 0x2009: case 0x200A:
    case 0x202F:
      return " ";
    case 0x200B: case 0xFEFF:
      return "";
    default:
      return nullptr;
  }
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    if (is_space(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string fold_key(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c) || c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string ascii_normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto decoded = decode_utf8(s, i);
    if (!decoded) {
      out.push_back(s[i]);
      ++i;
      continue;
    }
    auto [cp, len] = *decoded;
    if (const char* rep = ascii_replacement(cp)) {
      out += rep;
    } else {
      out.append(s.substr(i, len));
    }
    i += len;
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    auto decoded = decode_utf8(s, i);
    i += decoded ? decoded->second : 1;
    ++n;
  }
  return n;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  thread_local std::unique_ptr<icu::BreakIterator> iterator = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(
        icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status)) {
      throw Error(ErrorCode::kInput, std::string("ICU word iterator: ") + u_errorName(status));
    }
    return it;
  }();

  const icu::UnicodeString ustr = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  iterator->setText(ustr);

  std::vector<std::string> tokens;
  int32_t start = iterator->first();
  for (int32_t end = iterator->next(); end != icu::BreakIterator::DONE;
       start = end, end = iterator->next()) {
    if (iterator->getRuleStatus() == UBRK_WORD_NONE) continue;
    icu::UnicodeString word;
    ustr.extract(start, end - start, word);
    word.toLower(icu::Locale::getRoot());
    icu::UnicodeString kept;
    for (int32_t i = 0; i < word.length();) {
      const UChar32 cp = word.char32At(i);
      if (!u_ispunct(cp) && !u_isUWhiteSpace(cp) && !(u_charType(cp) == U_MATH_SYMBOL) &&
          !(u_charType(cp) == U_OTHER_SYMBOL) && !(u_charType(cp) == U_MODIFIER_SYMBOL) &&
          !(u_charType(cp) == U_CURRENCY_SYMBOL)) {
        kept.append(cp);
      }
      i += U16_LENGTH(cp);
    }
    if (kept.isEmpty()) continue;
    std::string utf8;
    kept.toUTF8String(utf8);
    tokens.push_back(std::move(utf8));
  }
  return tokens;
}

}  // namespace sisynth
