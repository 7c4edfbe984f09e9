#include "denoiser/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <queue>

#include "denoiser/errors.hpp"
#include "denoiser/random.hpp"

namespace denoiser::corpus {

namespace {

using text::WordCandidate;

thread_local std::size_t g_last_evaluations = 0;

// Heap comparator: the top of the heap is the worst retained candidate.
struct WorseOnTop {
  bool operator()(const WordCandidate& a, const WordCandidate& b) const noexcept {
    return candidate_before(a, b);
  }
};

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(const Entry& entry, std::size_t distance) {
    if (heap_.size() == k_) {
      const WordCandidate& worst = heap_.top();
      if (distance > worst.distance) return;
      WordCandidate probe{entry.word, distance, entry.frequency};
      if (!candidate_before(probe, worst)) return;
      heap_.pop();
      heap_.push(std::move(probe));
      return;
    }
    heap_.push(WordCandidate{entry.word, distance, entry.frequency});
  }

  // Largest distance still able to enter the set.
  std::size_t radius() const noexcept {
    return heap_.size() < k_ ? std::numeric_limits<std::size_t>::max() : heap_.top().distance;
  }

  std::vector<WordCandidate> take_sorted() {
    std::vector<WordCandidate> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<WordCandidate, std::vector<WordCandidate>, WorseOnTop> heap_;
};

void require_k(std::size_t k) {
  if (k == 0) throw ConfigError("proposal count k must be at least 1");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool candidate_before(const WordCandidate& a, const WordCandidate& b) noexcept {
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return a.word < b.word;
}

Corpus Corpus::from_entries(const std::map<std::string, std::uint64_t>& entries) {
  std::map<std::string, std::uint64_t> merged;
  for (const auto& [raw, freq] : entries) {
    const text::ClassText tokens = text::tokenize(raw);
    if (tokens.size() != 1) throw InvalidClassText("corpus word contains whitespace: " + raw);
    if (freq == 0) throw InvalidClassText("corpus frequency must be positive: " + raw);
    merged[tokens.words.front()] += freq;
  }
  if (merged.empty()) throw EmptyCorpus();

  Corpus c;
  c.entries_.reserve(merged.size());
  for (auto& [word, freq] : merged) {
    c.lookup_.emplace(word, c.entries_.size());
    c.entries_.push_back(Entry{word, text::to_code_points(word), freq});
    c.total_frequency_ += freq;
  }
  return c;
}

std::optional<std::size_t> Corpus::find(std::string_view word) const {
  auto it = lookup_.find(std::string(word));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Corpus::frequency(std::string_view word) const {
  auto idx = find(word);
  return idx ? entries_[*idx].frequency : 0;
}

Corpus parse_corpus(std::istream& in) {
  std::map<std::string, std::uint64_t> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;

    std::string_view word = view;
    std::uint64_t freq = 1;
    if (const auto tab = view.find('\t'); tab != std::string_view::npos) {
      word = trim(view.substr(0, tab));
      const std::string_view field = trim(view.substr(tab + 1));
      if (field.find('\t') != std::string_view::npos) throw CorpusParseError(line_no, "too many fields");
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), freq);
      if (ec != std::errc() || ptr != field.data() + field.size() || freq == 0) {
        throw CorpusParseError(line_no, "frequency must be a positive integer");
      }
    }
    std::string normalized;
    try {
      const text::ClassText tokens = text::tokenize(word);
      if (tokens.size() != 1) throw CorpusParseError(line_no, "word contains whitespace");
      normalized = tokens.words.front();
    } catch (const InvalidClassText&) {
      throw CorpusParseError(line_no, "empty word");
    }
    entries[normalized] += freq;
  }
  return Corpus::from_entries(entries);
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return parse_corpus(in);
}

ProposalSet propose_linear(const Corpus& corpus, std::string_view word, std::size_t k) {
  require_k(k);
  const std::u32string query = text::to_code_points(word);
  std::vector<WordCandidate> all;
  all.reserve(corpus.size());
  for (const Entry& e : corpus.entries()) {
    all.push_back(WordCandidate{e.word, text::edit_distance(query, e.code_points), e.frequency});
  }
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    candidate_before);
  all.resize(keep);
  return ProposalSet{std::string(word), std::move(all)};
}

CorpusIndex::CorpusIndex(Corpus corpus) : corpus_(std::move(corpus)) {
  const std::size_t n = corpus_.size();
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  // Lexicographic insertion builds a lopsided tree; a fixed shuffle does not.
  Rng rng(0x5eed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);

  nodes_.reserve(n);
  nodes_.push_back(Node{order[0], {}});
  for (std::size_t i = 1; i < n; ++i) {
    const Entry& entry = corpus_[order[i]];
    std::uint32_t current = 0;
    for (;;) {
      const auto d = static_cast<std::uint32_t>(
          text::edit_distance(entry.code_points, corpus_[nodes_[current].entry].code_points));
      auto& children = nodes_[current].children;
      auto it = std::find_if(children.begin(), children.end(),
                             [d](const auto& child) { return child.first == d; });
      if (it == children.end()) {
        const auto index = static_cast<std::uint32_t>(nodes_.size());
        children.emplace_back(d, index);
        nodes_.push_back(Node{order[i], {}});
        break;
      }
      current = it->second;
    }
  }
  for (auto& node : nodes_) std::sort(node.children.begin(), node.children.end());
}

ProposalSet CorpusIndex::propose(std::string_view word, std::size_t k) const {
  require_k(k);
  const std::u32string query = text::to_code_points(word);
  TopK best(std::min(k, corpus_.size()));
  std::size_t evaluations = 0;

  // (lower bound on any distance in the subtree, node index)
  std::vector<std::pair<std::size_t, std::uint32_t>> stack{{0, 0}};
  std::vector<std::pair<std::size_t, std::uint32_t>> pending;
  while (!stack.empty()) {
    const auto [bound, index] = stack.back();
    stack.pop_back();
    if (bound > best.radius()) continue;

    const Node& node = nodes_[index];
    const Entry& entry = corpus_[node.entry];
    const std::size_t d = text::edit_distance(query, entry.code_points);
    ++evaluations;
    best.offer(entry, d);

    const std::size_t radius = best.radius();
    pending.clear();
    for (const auto& [edge, child] : node.children) {
      const std::size_t lower = edge > d ? edge - d : d - edge;
      if (lower <= radius) pending.emplace_back(lower, child);
    }
    // Closest subtrees are popped first so the radius shrinks early.
    std::sort(pending.begin(), pending.end(), std::greater<>());
    stack.insert(stack.end(), pending.begin(), pending.end());
  }
  g_last_evaluations = evaluations;
  return ProposalSet{std::string(word), best.take_sorted()};
}

std::size_t CorpusIndex::last_query_evaluations() noexcept { return g_last_evaluations; }

}  // namespace denoiser::corpus
