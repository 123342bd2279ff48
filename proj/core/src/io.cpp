#include "ruelle/io.hpp"

#include <array>
#include <charconv>
#include <json.hpp>

#include "ruelle/error.hpp"

namespace ruelle {

SystemDocument parse_system(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kConfig, "system document must be an object");
    for (const char* key : {"k", "matrix", "V"}) {
      if (!doc.contains(key)) throw Error(ErrorCode::kConfig, std::string("missing key '") + key + "'");
    }
    const auto matrix = doc.at("matrix").get<std::vector<std::vector<int>>>();
    const int k = doc.at("k").get<int>();
    if (k < 1 || static_cast<std::size_t>(k) != matrix.size()) {
      throw Error(ErrorCode::kConfig, "k = " + std::to_string(k) + " but matrix has " +
                                          std::to_string(matrix.size()) + " rows");
    }
    Subshift shift = Subshift::from_matrix(matrix);

    const auto& v = doc.at("V");
    if (!v.is_object() || !v.contains("depth") || !v.contains("values") ||
        !v.at("values").is_object()) {
      throw Error(ErrorCode::kConfig, "V needs 'depth' and a 'values' object");
    }
    std::vector<std::pair<std::string, double>> entries;
    for (const auto& [key, value] : v.at("values").items()) {
      if (!value.is_number()) throw Error(ErrorCode::kConfig, "V value for '" + key + "' is not a number");
      entries.emplace_back(key, value.get<double>());
    }
    auto weight = function_from_table(shift, v.at("depth").get<int>(), entries);
    return {std::move(shift), std::move(weight)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed system document: ") + e.what());
  }
}

std::string format_number(double value) {
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

void write_masses_csv(std::ostream& out, const WordLayout& layout, std::span<const double> masses) {
  out << "word,mass\n";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out << format_word(layout.word(i), layout.alphabet_size()) << ',' << format_number(masses[i])
        << '\n';
  }
}

void write_function_csv(std::ostream& out, const CylinderFunction& f) {
  out << "word,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << format_word(f.layout().word(i), f.shift().alphabet_size()) << ','
        << format_number(f.at(i)) << '\n';
  }
}

void write_samples_csv(std::ostream& out, const std::vector<PathSample>& samples,
                       int alphabet_size) {
  out << "sample_id,base_word,prepends\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << i << ',' << format_word(samples[i].base, alphabet_size) << ','
        << format_word(samples[i].prepends, alphabet_size) << '\n';
  }
}

}  // namespace ruelle
