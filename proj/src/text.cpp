#include "denoiser/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "denoiser/errors.hpp"

namespace denoiser::text {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFC normalizer unavailable");
  return *n;
}

}  // namespace

std::string normalize(std::string_view raw) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s.toLower(icu::Locale::getRoot());
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc().normalize(s, status);
  if (U_FAILURE(status)) throw InvalidClassText("cannot normalize text");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::u32string to_code_points(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(bytes, i, n, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string to_utf8(std::u32string_view code_points) {
  std::string out;
  out.reserve(code_points.size());
  for (char32_t c : code_points) {
    uint8_t buf[4];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(buf, len, 4, static_cast<UChar32>(c), error);
    if (error) {
      len = 0;
      U8_APPEND_UNSAFE(buf, len, 0xFFFD);
    }
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
  }
  return out;
}

std::size_t length(std::string_view utf8) { return to_code_points(utf8).size(); }

std::string ClassText::render() const {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

ClassText tokenize(std::string_view raw, int class_id) {
  const std::u32string cps = to_code_points(normalize(raw));
  ClassText text;
  text.class_id = class_id;
  std::u32string current;
  for (char32_t c : cps) {
    if (u_isUWhiteSpace(static_cast<UChar32>(c))) {
      if (!current.empty()) text.words.push_back(to_utf8(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) text.words.push_back(to_utf8(current));
  if (text.words.empty()) throw InvalidClassText("class text has no words");
  return text;
}

ClassText with_word(const ClassText& text, std::size_t index, std::string word) {
  ClassText out = text;
  out.words.at(index) = std::move(word);
  return out;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // b is the shorter side; rows are |b| + 1 wide.
  std::vector<std::size_t> prev(b.size() + 1), curr(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitute});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(std::u32string_view(to_code_points(a)), std::u32string_view(to_code_points(b)));
}

std::vector<ClassText> parse_class_list(std::istream& in) {
  std::vector<ClassText> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(tokenize(line, static_cast<int>(out.size())));
    } catch (const InvalidClassText& e) {
      throw InvalidClassText("class list line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ClassText> read_class_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class list " + path.string());
  return parse_class_list(in);
}

std::string format_class_list(const std::vector<ClassText>& texts) {
  std::string out;
  for (const auto& t : texts) {
    out += t.render();
    out.push_back('\n');
  }
  return out;
}

}  // namespace denoiser::text
