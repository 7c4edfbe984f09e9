#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <utility>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "denoiser/text.hpp"

namespace denoiser::corpus {

struct Entry {
  std::string word;
  std::u32string code_points;
  std::uint64_t frequency = 1;
};

/// Lexicon of candidate words with frequencies. Entries are unique,
/// normalized, and kept in lexicographic (UTF-8 byte) order.
class Corpus {
 public:
  /// Words are normalized and duplicates merged by summing frequencies.
  /// Throws EmptyCorpus when `entries` is empty and InvalidClassText for a
  /// word that is empty or contains whitespace.
  static Corpus from_entries(const std::map<std::string, std::uint64_t>& entries);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> find(std::string_view word) const;
  std::uint64_t frequency(std::string_view word) const;
  std::uint64_t total_frequency() const noexcept { return total_frequency_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::uint64_t total_frequency_ = 0;
};

// `word<TAB>frequency` per line, frequency optional (defaults to 1), blank
// lines and '#' comments skipped.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

struct ProposalSet {
  std::string source_word;
  std::vector<text::WordCandidate> candidates;
};

/// Strict weak order used for every proposal list: distance ascending,
/// frequency descending, word ascending.
bool candidate_before(const text::WordCandidate& a, const text::WordCandidate& b) noexcept;

/// Reference implementation: scores every corpus word.
ProposalSet propose_linear(const Corpus& corpus, std::string_view word, std::size_t k);

/// BK-tree over the corpus. Queries return exactly what propose_linear
/// returns; the tree only prunes subtrees that the triangle inequality
/// proves cannot reach the current k-th best distance.
class CorpusIndex {
 public:
  explicit CorpusIndex(Corpus corpus);

  const Corpus& corpus() const noexcept { return corpus_; }

  ProposalSet propose(std::string_view word, std::size_t k) const;

  // Distance computations performed by the most recent query on this thread.
  static std::size_t last_query_evaluations() noexcept;

 private:
  struct Node {
    std::uint32_t entry;
    // (edge distance, child node index), sorted by edge distance.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> children;
  };

  Corpus corpus_;
  std::vector<Node> nodes_;
};

}  // namespace denoiser::corpus
