#include "ruelle/transfer.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "detail.hpp"
#include "ruelle/error.hpp"

namespace ruelle {
namespace {

constexpr double kEigenvalueTolerance = 1e-10;

}  // namespace

int closed_depth(const CylinderFunction& weight) { return std::max(weight.depth() - 1, 1); }

CylinderFunction apply_transfer(const CylinderFunction& weight, const CylinderFunction& f) {
  require_nonnegative(weight, "weight");
  if (!(weight.shift() == f.shift())) {
    throw Error(ErrorCode::kInvalidArgument, "weight and function live on different subshifts");
  }
  const Subshift& shift = weight.shift();
  const int depth = std::max({weight.depth() - 1, f.depth() - 1, 1});
  Word y(static_cast<std::size_t>(depth) + 1);
  return CylinderFunction::tabulate(shift, depth, [&](std::span<const Symbol> x) {
    std::copy(x.begin(), x.end(), y.begin() + 1);
    double sum = 0.0;
    for (Symbol a : shift.preimage_symbols(x[0])) {
      y[0] = a;
      sum += weight(y) * f(y);
    }
    return sum / shift.column_sum(x[0]);
  });
}

CylinderFunction apply_transfer_power(const CylinderFunction& weight, const CylinderFunction& f,
                                      int n) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "negative transfer power");
  CylinderFunction out = f;
  for (int i = 0; i < n; ++i) out = apply_transfer(weight, out);
  return out;
}

CylinderFunction TransferMatrix::apply(const CylinderFunction& f) const {
  const auto fp = promote_depth(f, depth());
  const Eigen::Map<const Eigen::VectorXd> in(fp.values().data(),
                                             static_cast<Eigen::Index>(fp.size()));
  const Eigen::VectorXd out = entries * in;
  return CylinderFunction(layout, std::vector<double>(out.data(), out.data() + out.size()));
}

TransferMatrix transfer_matrix(const CylinderFunction& weight, int depth) {
  require_nonnegative(weight, "weight");
  if (depth < closed_depth(weight)) {
    throw Error(ErrorCode::kDepthTooShallow,
                "transfer matrix at depth " + std::to_string(depth) + " needs depth >= " +
                    std::to_string(closed_depth(weight)));
  }
  const Subshift& shift = weight.shift();
  TransferMatrix tm{shift.layout(depth), {}};
  const auto n = static_cast<Eigen::Index>(tm.layout->size());
  tm.entries = Eigen::MatrixXd::Zero(n, n);
  Word x(static_cast<std::size_t>(depth));
  Word y(static_cast<std::size_t>(depth) + 1);
  for (std::size_t row = 0; row < tm.layout->size(); ++row) {
    tm.layout->decode(row, x);
    std::copy(x.begin(), x.end(), y.begin() + 1);
    for (Symbol a : shift.preimage_symbols(x[0])) {
      y[0] = a;
      const auto col = tm.layout->index_of(y);
      tm.entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
          weight(y) / shift.column_sum(x[0]);
    }
  }
  return tm;
}

HResult iterate_to_h(const CylinderFunction& weight, const HOptions& options) {
  const TransferMatrix tm = transfer_matrix(weight, closed_depth(weight));
  const auto n = static_cast<Eigen::Index>(tm.layout->size());

  Eigen::VectorXd h = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd next = tm.entries * h;
  const double sup_r1 = next.maxCoeff();
  if (sup_r1 > 1.0 + options.monotonicity_tol) {
    throw Error(ErrorCode::kNotSubNormalized,
                "sup R_V(1) = " + std::to_string(sup_r1) + " exceeds 1");
  }

  for (int it = 1; it <= options.max_iter; ++it) {
    const double overshoot = (next - h).maxCoeff();
    if (overshoot > options.monotonicity_tol) {
      throw Error(ErrorCode::kMonotonicityViolation,
                  "R_V^n(1) increased by " + std::to_string(overshoot) + " at step " +
                      std::to_string(it));
    }
    const double change = (next - h).lpNorm<Eigen::Infinity>();
    h = next;
    if (change < options.tol) {
      HResult result{CylinderFunction(tm.layout, std::vector<double>(h.data(), h.data() + n)),
                     it, (tm.entries * h - h).lpNorm<Eigen::Infinity>(), HStatus::kConverged,
                     sup_r1};
      if (h.maxCoeff() < options.degenerate_threshold) result.status = HStatus::kDegenerate;
      return result;
    }
    next = tm.entries * h;
  }
  throw Error(ErrorCode::kNoConvergence,
              "R_V^n(1) not settled after " + std::to_string(options.max_iter) + " iterations");
}

double FixedFunctional::operator()(const CylinderFunction& f) const {
  const auto fp = promote_depth(f, layout->depth());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * fp.at(i);
  return total;
}

std::optional<FixedFunctional> left_fixed_functional(const CylinderFunction& weight) {
  const TransferMatrix tm = transfer_matrix(weight, closed_depth(weight));
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(tm.entries.transpose());
  const auto& values = solver.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i) - std::complex<double>(1.0, 0.0)) > kEigenvalueTolerance) continue;
    Eigen::VectorXd v = solver.eigenvectors().col(i).real();
    if (v.sum() < 0) v = -v;
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0 || v.minCoeff() < -1e-12 * scale) continue;
    v = v.cwiseMax(0.0);
    v /= v.sum();
    return FixedFunctional{tm.layout, std::vector<double>(v.data(), v.data() + v.size())};
  }
  return std::nullopt;
}

double check_weight_pushforward(const CylinderFunction& weight, const CylinderFunction& f,
                                const MarkovMeasure& rho, int n) {
  const double lhs = rho.integrate(multiply(weight_product(weight, n), f));
  const double rhs = rho.integrate(apply_transfer_power(weight, f, n));
  return std::abs(lhs - rhs);
}

CylinderFunction product_weight(const CylinderFunction& v, const CylinderFunction& w) {
  require_nonnegative(v, "V");
  require_nonnegative(w, "W");
  return multiply(v, w);
}

ConformalMeasure::ConformalMeasure(CylinderFunction weight, FixedFunctional base)
    : weight_(std::move(weight)), base_(std::move(base)) {
  require_nonnegative(weight_, "weight");
  if (base_.layout->depth() != closed_depth(weight_) || !(base_.layout->shift() == weight_.shift()) ||
      base_.weights.size() != base_.layout->size()) {
    throw Error(ErrorCode::kInvalidArgument, "conformal base marginal has the wrong layout");
  }
}

ConformalMeasure ConformalMeasure::from_markov(const MarkovMeasure& rho) {
  const auto layout = rho.shift().layout(1);
  return ConformalMeasure(CylinderFunction::constant(rho.shift(), 1, 1.0),
                          FixedFunctional{layout, rho.masses(*layout)});
}

double ConformalMeasure::mass(std::span<const Symbol> word) const {
  const Subshift& shift = weight_.shift();
  if (!shift.admissible(word)) {
    throw Error(ErrorCode::kInadmissibleWord, format_word(word, shift.alphabet_size()));
  }
  const auto base_depth = static_cast<std::size_t>(base_.layout->depth());
  if (word.size() < base_depth) {
    const auto coarse = shift.layout(static_cast<int>(word.size()));
    return detail::coarsen(*base_.layout, base_.weights, *coarse)[coarse->index_of(word)];
  }
  const std::size_t head = word.size() - base_depth;
  double mass = base_.weights[base_.layout->index_of(word.subspan(head))];
  for (std::size_t i = head; i-- > 0;) {
    mass *= weight_(word.subspan(i)) / shift.column_sum(word[i + 1]);
  }
  return mass;
}

std::vector<double> ConformalMeasure::masses(const WordLayout& layout) const {
  std::vector<double> out(layout.size());
  Word buffer(static_cast<std::size_t>(layout.depth()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    layout.decode(i, buffer);
    out[i] = mass(buffer);
  }
  return out;
}

std::optional<ConformalMeasure> conformal_measure(const CylinderFunction& weight) {
  auto nu = left_fixed_functional(weight);
  if (!nu) return std::nullopt;
  return ConformalMeasure(weight, std::move(*nu));
}

double check_conformal(const ConformalMeasure& nu, int depth) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  const Subshift& shift = nu.shift();
  const CylinderFunction& weight = nu.weight();
  const auto words = shift.layout(depth);
  const auto base = shift.layout(std::max({depth - 1, closed_depth(weight)}));
  std::vector<double> rhs(words->size(), 0.0);
  Word x(static_cast<std::size_t>(base->depth()));
  Word y(static_cast<std::size_t>(base->depth()) + 1);
  for (std::size_t i = 0; i < base->size(); ++i) {
    base->decode(i, x);
    const double mass = nu.mass(x) / shift.column_sum(x[0]);
    std::copy(x.begin(), x.end(), y.begin() + 1);
    for (Symbol a : shift.preimage_symbols(x[0])) {
      y[0] = a;
      rhs[words->index_of(y)] += weight(y) * mass;
    }
  }
  auto diff = nu.masses(*words);
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= rhs[j];
  return detail::max_cylinder_deviation(*words, diff);
}

}  // namespace ruelle
