#include "ruelle/subshift.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ruelle/error.hpp"

namespace ruelle {

Subshift Subshift::from_matrix(const std::vector<std::vector<int>>& matrix) {
  const auto k = matrix.size();
  if (k == 0) throw Error(ErrorCode::kNonSquareMatrix, "empty transition matrix");
  auto impl = std::make_shared<Impl>();
  impl->k = static_cast<int>(k);
  impl->matrix.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    if (matrix[i].size() != k) {
      throw Error(ErrorCode::kNonSquareMatrix,
                  "row " + std::to_string(i + 1) + " has " + std::to_string(matrix[i].size()) +
                      " entries, expected " + std::to_string(k));
    }
    for (std::size_t j = 0; j < k; ++j) {
      const int v = matrix[i][j];
      if (v != 0 && v != 1) {
        throw Error(ErrorCode::kNonBinaryEntry, "A(" + std::to_string(i + 1) + "," +
                                                    std::to_string(j + 1) + ") = " +
                                                    std::to_string(v));
      }
      impl->matrix[i * k + j] = static_cast<std::uint8_t>(v);
    }
  }
  impl->column_sums.assign(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) impl->column_sums[j] += impl->matrix[i * k + j];
    if (impl->column_sums[j] == 0) {
      throw Error(ErrorCode::kZeroColumn, "column " + std::to_string(j + 1) + " has no entry 1");
    }
  }

  // Transitive closure; k is small.
  std::vector<std::uint8_t> reach(impl->matrix);
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t i = 0; i < k; ++i)
      if (reach[i * k + m])
        for (std::size_t j = 0; j < k; ++j)
          if (reach[m * k + j]) reach[i * k + j] = 1;
  impl->irreducible = std::all_of(reach.begin(), reach.end(), [](auto v) { return v != 0; });

  return Subshift(std::move(impl));
}

Subshift Subshift::full_shift(int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "alphabet size must be positive");
  return from_matrix(std::vector<std::vector<int>>(static_cast<std::size_t>(k),
                                                   std::vector<int>(static_cast<std::size_t>(k), 1)));
}

Subshift Subshift::golden_mean() { return from_matrix({{1, 1}, {1, 0}}); }

std::vector<std::vector<int>> Subshift::matrix() const {
  const auto k = static_cast<std::size_t>(impl_->k);
  std::vector<std::vector<int>> out(k, std::vector<int>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) out[i][j] = impl_->matrix[i * k + j];
  return out;
}

std::vector<Symbol> Subshift::preimage_symbols(Symbol j) const {
  if (j < 0 || j >= impl_->k) throw Error(ErrorCode::kInvalidArgument, "symbol out of range");
  std::vector<Symbol> out;
  for (Symbol a = 0; a < impl_->k; ++a)
    if (allowed(a, j)) out.push_back(a);
  return out;
}

bool Subshift::admissible(std::span<const Symbol> word) const {
  if (word.empty()) return false;
  for (Symbol s : word)
    if (s < 0 || s >= impl_->k) return false;
  for (std::size_t i = 0; i + 1 < word.size(); ++i)
    if (!allowed(word[i], word[i + 1])) return false;
  return true;
}

std::vector<Word> Subshift::admissible_words(int depth) const {
  const auto layout = this->layout(depth);
  std::vector<Word> out;
  out.reserve(layout->size());
  for (std::size_t i = 0; i < layout->size(); ++i) out.push_back(layout->word(i));
  return out;
}

std::uint64_t Subshift::word_count(int depth) const {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  const auto k = static_cast<std::size_t>(impl_->k);
  // counts[j] = number of admissible words of the current length ending in j
  std::vector<std::uint64_t> counts(k, 1);
  for (int len = 1; len < depth; ++len) {
    std::vector<std::uint64_t> next(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (impl_->matrix[i * k + j]) next[j] += counts[i];
    counts = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

std::shared_ptr<const WordLayout> Subshift::layout(int depth) const {
  return std::make_shared<const WordLayout>(*this, depth);
}

bool Subshift::operator==(const Subshift& other) const {
  return impl_ == other.impl_ || (impl_->k == other.impl_->k && impl_->matrix == other.impl_->matrix);
}

WordLayout::WordLayout(const Subshift& shift, int depth)
    : shift_(shift), k_(shift.alphabet_size()), depth_(depth) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  if (static_cast<double>(depth) * std::log2(static_cast<double>(std::max(k_, 2))) > 62.0) {
    throw Error(ErrorCode::kInvalidArgument, "depth " + std::to_string(depth) + " too large");
  }
  const auto& impl = *shift.impl_;
  std::lock_guard lock(impl.cache_mutex);
  auto& cached = impl.code_cache[depth];
  if (!cached) {
    // Breadth-wise extension in lexicographic order yields sorted codes.
    std::vector<std::uint64_t> frontier;
    for (Symbol a = 0; a < k_; ++a) frontier.push_back(static_cast<std::uint64_t>(a));
    for (int len = 1; len < depth; ++len) {
      std::vector<std::uint64_t> next;
      next.reserve(frontier.size() * static_cast<std::size_t>(k_));
      for (auto code : frontier) {
        const auto last = static_cast<Symbol>(code % static_cast<std::uint64_t>(k_));
        for (Symbol b = 0; b < k_; ++b)
          if (shift.allowed(last, b))
            next.push_back(code * static_cast<std::uint64_t>(k_) + static_cast<std::uint64_t>(b));
      }
      frontier = std::move(next);
    }
    cached = std::make_shared<const std::vector<std::uint64_t>>(std::move(frontier));
  }
  codes_ = cached;
}

void WordLayout::decode(std::size_t index, std::span<Symbol> out) const {
  auto code = codes_->at(index);
  for (int i = depth_ - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<Symbol>(code % static_cast<std::uint64_t>(k_));
    code /= static_cast<std::uint64_t>(k_);
  }
}

Word WordLayout::word(std::size_t index) const {
  Word w(static_cast<std::size_t>(depth_));
  decode(index, w);
  return w;
}

std::optional<std::size_t> WordLayout::find(std::span<const Symbol> word) const {
  if (word.size() < static_cast<std::size_t>(depth_)) return std::nullopt;
  std::uint64_t code = 0;
  for (int i = 0; i < depth_; ++i) {
    const Symbol s = word[static_cast<std::size_t>(i)];
    if (s < 0 || s >= k_) return std::nullopt;
    code = code * static_cast<std::uint64_t>(k_) + static_cast<std::uint64_t>(s);
  }
  const auto it = std::lower_bound(codes_->begin(), codes_->end(), code);
  if (it == codes_->end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - codes_->begin());
}

std::size_t WordLayout::index_of(std::span<const Symbol> word) const {
  if (word.size() < static_cast<std::size_t>(depth_)) {
    throw Error(ErrorCode::kDepthTooShallow, "word of length " + std::to_string(word.size()) +
                                                 " read at depth " + std::to_string(depth_));
  }
  if (auto idx = find(word)) return *idx;
  throw Error(ErrorCode::kInadmissibleWord,
              format_word(word.first(static_cast<std::size_t>(depth_)), k_));
}

std::pair<std::size_t, std::size_t> WordLayout::prefix_range(
    std::span<const Symbol> prefix) const {
  if (prefix.size() > static_cast<std::size_t>(depth_)) {
    throw Error(ErrorCode::kInvalidArgument, "prefix longer than layout depth");
  }
  std::uint64_t lo = 0;
  for (Symbol s : prefix) {
    if (s < 0 || s >= k_) return {0, 0};
    lo = lo * static_cast<std::uint64_t>(k_) + static_cast<std::uint64_t>(s);
  }
  std::uint64_t span = 1;
  for (std::size_t i = prefix.size(); i < static_cast<std::size_t>(depth_); ++i)
    span *= static_cast<std::uint64_t>(k_);
  lo *= span;
  const auto first = std::lower_bound(codes_->begin(), codes_->end(), lo);
  const auto last = std::lower_bound(first, codes_->end(), lo + span);
  return {static_cast<std::size_t>(first - codes_->begin()),
          static_cast<std::size_t>(last - codes_->begin())};
}

std::string format_word(std::span<const Symbol> word, int alphabet_size) {
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (alphabet_size > 9) {
      if (i > 0) out += '.';
      out += std::to_string(word[i] + 1);
    } else {
      out += static_cast<char>('1' + word[i]);
    }
  }
  return out;
}

Word parse_word(const std::string& text, int alphabet_size) {
  Word out;
  auto bad = [&] { return Error(ErrorCode::kConfig, "malformed word '" + text + "'"); };
  if (text.empty()) throw bad();
  if (alphabet_size > 9) {
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (part.empty() || !std::all_of(part.begin(), part.end(), ::isdigit)) throw bad();
      const int v = std::stoi(part);
      if (v < 1 || v > alphabet_size) throw bad();
      out.push_back(v - 1);
    }
  } else {
    for (char c : text) {
      if (c < '1' || c > static_cast<char>('0' + alphabet_size)) throw bad();
      out.push_back(c - '1');
    }
  }
  return out;
}

}  // namespace ruelle
