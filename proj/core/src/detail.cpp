#include "detail.hpp"

#include <algorithm>
#include <cmath>

#include "ruelle/error.hpp"

namespace ruelle::detail {

std::vector<double> coarsen(const WordLayout& from, std::span<const double> values,
                            const WordLayout& to) {
  if (to.depth() > from.depth()) {
    throw Error(ErrorCode::kDepthTooShallow, "cannot coarsen to a finer depth");
  }
  std::vector<double> out(to.size(), 0.0);
  Word buffer(static_cast<std::size_t>(from.depth()));
  for (std::size_t i = 0; i < from.size(); ++i) {
    from.decode(i, buffer);
    out[to.index_of(buffer)] += values[i];
  }
  return out;
}

double max_cylinder_deviation(const WordLayout& layout, std::span<const double> diff) {
  double worst = 0.0;
  for (double v : diff) worst = std::max(worst, std::abs(v));
  for (int d = layout.depth() - 1; d >= 1; --d) {
    const auto coarse = layout.shift().layout(d);
    for (double v : coarsen(layout, diff, *coarse)) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

}  // namespace ruelle::detail
