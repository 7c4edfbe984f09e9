#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace denoiser::text {

// NFC-normalized, lowercased copy of `raw` (UTF-8 in, UTF-8 out). Invalid
// UTF-8 sequences become U+FFFD.
std::string normalize(std::string_view raw);

std::u32string to_code_points(std::string_view utf8);
std::string to_utf8(std::u32string_view code_points);

// Length in Unicode scalar values.
std::size_t length(std::string_view utf8);

/// An ordered word sequence naming one class. Used for clean, noisy and
/// partially decoded labels alike.
struct ClassText {
  int class_id = 0;
  std::vector<std::string> words;

  std::size_t size() const noexcept { return words.size(); }
  std::string render() const;

  friend bool operator==(const ClassText&, const ClassText&) = default;
};

/// Lowercases, NFC-normalizes and splits on runs of Unicode whitespace.
/// Punctuation and digits stay inside tokens. Throws InvalidClassText when
/// no token remains.
ClassText tokenize(std::string_view raw, int class_id = 0);

/// Copy of `text` with word `index` replaced.
ClassText with_word(const ClassText& text, std::size_t index, std::string word);

/// Plain Levenshtein distance (unit insert/delete/substitute, no
/// transpositions) over Unicode scalar values.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);
std::size_t edit_distance(std::string_view a, std::string_view b);

/// A proposed replacement for a noisy word.
struct WordCandidate {
  std::string word;
  std::size_t distance = 0;
  std::uint64_t frequency = 1;

  friend bool operator==(const WordCandidate&, const WordCandidate&) = default;
};

// Class-list files: one description per line, class_id = line order among
// kept lines, blank lines and '#' comments skipped.
std::vector<ClassText> parse_class_list(std::istream& in);
std::vector<ClassText> read_class_list(const std::filesystem::path& path);
std::string format_class_list(const std::vector<ClassText>& texts);

}  // namespace denoiser::text
