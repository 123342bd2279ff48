#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ruelle/cylinder_function.hpp"
#include "ruelle/path_space.hpp"
#include "ruelle/subshift.hpp"

namespace ruelle {

// {"k": 2, "matrix": [[1,1],[1,1]], "V": {"depth": 1, "values": {"1": 1.5, "2": 0.5}}}
struct SystemDocument {
  Subshift shift;
  CylinderFunction weight;
};

// Throws kConfig on malformed JSON, missing keys, a "k" that disagrees with
// the matrix, or a value table that misses an admissible word or names an
// inadmissible one; matrix errors keep their own codes.
SystemDocument parse_system(std::string_view json_text);

// Builds a depth-d function from (word, value) pairs keyed by 1-based digit
// strings. Every admissible word must appear exactly once. Throws kConfig.
template <typename T>
BasicCylinderFunction<T> function_from_table(
    const Subshift& shift, int depth, const std::vector<std::pair<std::string, T>>& entries) {
  if (depth < 1) throw Error(ErrorCode::kConfig, "table depth must be >= 1");
  const auto layout = shift.layout(depth);
  std::vector<T> values(layout->size());
  std::vector<bool> seen(layout->size(), false);
  for (const auto& [key, value] : entries) {
    const Word w = parse_word(key, shift.alphabet_size());
    if (w.size() != static_cast<std::size_t>(depth)) {
      throw Error(ErrorCode::kConfig, "word '" + key + "' does not have length " +
                                          std::to_string(depth));
    }
    const auto idx = layout->find(w);
    if (!idx) throw Error(ErrorCode::kConfig, "word '" + key + "' is not admissible");
    if (seen[*idx]) throw Error(ErrorCode::kConfig, "word '" + key + "' listed twice");
    seen[*idx] = true;
    values[*idx] = value;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::kConfig,
                  "missing value for word '" +
                      format_word(layout->word(i), shift.alphabet_size()) + "'");
    }
  }
  return BasicCylinderFunction<T>(layout, std::move(values));
}

// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

// "word,mass" rows in layout order.
void write_masses_csv(std::ostream& out, const WordLayout& layout, std::span<const double> masses);
// "word,value" rows in layout order.
void write_function_csv(std::ostream& out, const CylinderFunction& f);
// "sample_id,base_word,prepends"; prepends are listed in the order drawn.
void write_samples_csv(std::ostream& out, const std::vector<PathSample>& samples,
                       int alphabet_size);

}  // namespace ruelle
