#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ruelle/error.hpp"
#include "ruelle/subshift.hpp"

namespace ruelle {

// A function on X(A) that is constant on the cylinders of one depth d:
// exactly one value per admissible word of length d, stored in the
// lexicographic order of the layout.
template <typename T>
class BasicCylinderFunction {
 public:
  using value_type = T;

  BasicCylinderFunction(std::shared_ptr<const WordLayout> layout, std::vector<T> values)
      : layout_(std::move(layout)), values_(std::move(values)) {
    if (!layout_ || values_.size() != layout_->size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cylinder function needs one value per admissible word");
    }
  }

  static BasicCylinderFunction constant(const Subshift& shift, int depth, T value) {
    auto layout = shift.layout(depth);
    std::vector<T> values(layout->size(), value);
    return BasicCylinderFunction(std::move(layout), std::move(values));
  }

  // Tabulates fn(word) over the admissible words of the given depth.
  template <typename Fn>
  static BasicCylinderFunction tabulate(const Subshift& shift, int depth, Fn&& fn) {
    auto layout = shift.layout(depth);
    std::vector<T> values(layout->size());
    Word buffer(static_cast<std::size_t>(depth));
    for (std::size_t i = 0; i < layout->size(); ++i) {
      layout->decode(i, buffer);
      values[i] = fn(std::span<const Symbol>(buffer));
    }
    return BasicCylinderFunction(std::move(layout), std::move(values));
  }

  const Subshift& shift() const { return layout_->shift(); }
  int depth() const { return layout_->depth(); }
  std::size_t size() const { return values_.size(); }
  const WordLayout& layout() const { return *layout_; }
  const std::shared_ptr<const WordLayout>& layout_ptr() const { return layout_; }
  std::span<const T> values() const& { return values_; }
  std::span<const T> values() const&& = delete;

  T at(std::size_t index) const { return values_.at(index); }

  // Value on the cylinder containing `word`; only the first depth() symbols
  // are read. Inadmissible or short words throw.
  T operator()(std::span<const Symbol> word) const {
    return values_[layout_->index_of(word)];
  }
  T operator()(const Word& word) const { return (*this)(std::span<const Symbol>(word)); }

 private:
  std::shared_ptr<const WordLayout> layout_;
  std::vector<T> values_;
};

using CylinderFunction = BasicCylinderFunction<double>;
using ComplexCylinderFunction = BasicCylinderFunction<std::complex<double>>;

// Same function viewed at a finer depth. Throws kDepthDowngrade if depth < f.depth().
template <typename T>
BasicCylinderFunction<T> promote_depth(const BasicCylinderFunction<T>& f, int depth) {
  if (depth < f.depth()) {
    throw Error(ErrorCode::kDepthDowngrade,
                "cannot promote depth " + std::to_string(f.depth()) + " to " +
                    std::to_string(depth));
  }
  if (depth == f.depth()) return f;
  return BasicCylinderFunction<T>::tabulate(
      f.shift(), depth, [&](std::span<const Symbol> w) { return f(w); });
}

// f∘r at depth d+1: (f∘r)(w_1 … w_{d+1}) = f(w_2 … w_{d+1}).
template <typename T>
BasicCylinderFunction<T> compose_with_shift(const BasicCylinderFunction<T>& f) {
  return BasicCylinderFunction<T>::tabulate(
      f.shift(), f.depth() + 1, [&](std::span<const Symbol> w) { return f(w.subspan(1)); });
}

// Pointwise combination at the common (larger) depth.
template <typename T, typename Op>
BasicCylinderFunction<T> combine(const BasicCylinderFunction<T>& f,
                                 const BasicCylinderFunction<T>& g, Op&& op) {
  if (!(f.shift() == g.shift())) {
    throw Error(ErrorCode::kInvalidArgument, "functions live on different subshifts");
  }
  const int depth = std::max(f.depth(), g.depth());
  const auto fp = promote_depth(f, depth);
  const auto gp = promote_depth(g, depth);
  std::vector<T> values(fp.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = op(fp.at(i), gp.at(i));
  return BasicCylinderFunction<T>(fp.layout_ptr(), std::move(values));
}

template <typename T, typename Op>
BasicCylinderFunction<T> transform(const BasicCylinderFunction<T>& f, Op&& op) {
  std::vector<T> values(f.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = op(f.at(i));
  return BasicCylinderFunction<T>(f.layout_ptr(), std::move(values));
}

template <typename T>
BasicCylinderFunction<T> multiply(const BasicCylinderFunction<T>& f,
                                  const BasicCylinderFunction<T>& g) {
  return combine(f, g, [](T a, T b) { return a * b; });
}

template <typename T>
BasicCylinderFunction<T> add(const BasicCylinderFunction<T>& f,
                             const BasicCylinderFunction<T>& g) {
  return combine(f, g, [](T a, T b) { return a + b; });
}

template <typename T>
BasicCylinderFunction<T> scale(const BasicCylinderFunction<T>& f, T factor) {
  return transform(f, [factor](T a) { return a * factor; });
}

inline double sup_norm(const CylinderFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

// sup |f - g| over the common depth.
inline double sup_distance(const CylinderFunction& f, const CylinderFunction& g) {
  return sup_norm(combine(f, g, [](double a, double b) { return a - b; }));
}

// Throws kNegativeWeight if any value is negative.
void require_nonnegative(const CylinderFunction& f, const char* what);

// V^(n)(x) = V(x) V(r x) … V(r^{n-1} x), a function of depth m+n-1.
CylinderFunction weight_product(const CylinderFunction& weight, int n);

}  // namespace ruelle
