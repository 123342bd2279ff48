#include "ruelle/cylinder_function.hpp"

namespace ruelle {

void require_nonnegative(const CylinderFunction& f, const char* what) {
  Word buffer(static_cast<std::size_t>(f.depth()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f.at(i) >= 0.0)) {
      f.layout().decode(i, buffer);
      throw Error(ErrorCode::kNegativeWeight,
                  std::string(what) + " is " + std::to_string(f.at(i)) + " on [" +
                      format_word(buffer, f.shift().alphabet_size()) + "]");
    }
  }
}

CylinderFunction weight_product(const CylinderFunction& weight, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "weight_product needs n >= 1");
  require_nonnegative(weight, "weight");
  if (n == 1) return weight;
  const auto m = static_cast<std::size_t>(weight.depth());
  return CylinderFunction::tabulate(
      weight.shift(), weight.depth() + n - 1, [&](std::span<const Symbol> w) {
        double product = 1.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
          product *= weight(w.subspan(i, m));
        }
        return product;
      });
}

}  // namespace ruelle
