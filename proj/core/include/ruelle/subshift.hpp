#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ruelle {

// Symbols are 0-based in memory. Text formats (JSON keys, CSV columns) use
// 1-based digits, see format_word / parse_word.
using Symbol = int;
using Word = std::vector<Symbol>;

class WordLayout;

// A subshift of finite type X(A): one-sided sequences x with A(x_i, x_{i+1}) = 1.
// The shift r drops the first symbol, so the preimages of a point starting
// with j are the points a·x with A(a, j) = 1.
//
// Cheap to copy; the transition data is shared and immutable.
class Subshift {
 public:
  // Throws kNonSquareMatrix, kNonBinaryEntry or kZeroColumn.
  static Subshift from_matrix(const std::vector<std::vector<int>>& matrix);

  static Subshift full_shift(int k);
  // A = [[1,1],[1,0]]
  static Subshift golden_mean();

  int alphabet_size() const { return impl_->k; }
  bool allowed(Symbol from, Symbol to) const {
    return impl_->matrix[static_cast<std::size_t>(from * impl_->k + to)] != 0;
  }
  int column_sum(Symbol j) const { return impl_->column_sums[static_cast<std::size_t>(j)]; }
  const std::vector<int>& column_sums() const { return impl_->column_sums; }
  std::vector<std::vector<int>> matrix() const;

  // Strongly connected transition graph.
  bool irreducible() const { return impl_->irreducible; }

  // All a with A(a, j) = 1, ascending. Never empty.
  std::vector<Symbol> preimage_symbols(Symbol j) const;

  bool admissible(std::span<const Symbol> word) const;

  // Lexicographically ordered admissible words of the given length (>= 1).
  std::vector<Word> admissible_words(int depth) const;

  // Number of admissible words of the given length, from powers of A.
  std::uint64_t word_count(int depth) const;

  std::shared_ptr<const WordLayout> layout(int depth) const;

  bool operator==(const Subshift& other) const;

 private:
  struct Impl {
    int k = 0;
    std::vector<std::uint8_t> matrix;  // row-major k*k
    std::vector<int> column_sums;
    bool irreducible = false;
    // Sorted word codes per depth, filled on first use.
    mutable std::mutex cache_mutex;
    mutable std::map<int, std::shared_ptr<const std::vector<std::uint64_t>>> code_cache;
  };
  friend class WordLayout;
  explicit Subshift(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

// Index of the admissible words of one fixed length. Words are stored as
// base-k codes; for words of equal length numeric order of the code is the
// lexicographic order, so lookup is a binary search.
class WordLayout {
 public:
  WordLayout(const Subshift& shift, int depth);

  int depth() const { return depth_; }
  int alphabet_size() const { return k_; }
  std::size_t size() const { return codes_->size(); }

  Word word(std::size_t index) const;
  // Writes the word into out (size() must equal depth()).
  void decode(std::size_t index, std::span<Symbol> out) const;

  // Looks up the first depth() symbols of `word`; nullopt if inadmissible
  // or too short.
  std::optional<std::size_t> find(std::span<const Symbol> word) const;
  // As find() but throws kInadmissibleWord / kDepthTooShallow.
  std::size_t index_of(std::span<const Symbol> word) const;

  // Half-open index range of the words starting with `prefix`
  // (|prefix| <= depth()); empty for inadmissible prefixes.
  std::pair<std::size_t, std::size_t> prefix_range(std::span<const Symbol> prefix) const;

  const Subshift& shift() const { return shift_; }

 private:
  Subshift shift_;
  int k_;
  int depth_;
  std::shared_ptr<const std::vector<std::uint64_t>> codes_;
};

// "121" for {0,1,0}. Alphabets above 9 use '.'-separated numbers.
std::string format_word(std::span<const Symbol> word, int alphabet_size);
// Inverse of format_word. Throws kConfig on malformed text.
Word parse_word(const std::string& text, int alphabet_size);

}  // namespace ruelle
