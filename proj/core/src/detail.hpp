#pragma once

#include <span>
#include <vector>

#include "ruelle/subshift.hpp"

namespace ruelle::detail {

// Sums values on depth-D words onto their length-d prefixes (d <= D).
std::vector<double> coarsen(const WordLayout& from, std::span<const double> values,
                            const WordLayout& to);

// Given signed per-cylinder differences at depth D, the largest |difference|
// over all cylinders of length 1..D.
double max_cylinder_deviation(const WordLayout& layout, std::span<const double> diff);

}  // namespace ruelle::detail
