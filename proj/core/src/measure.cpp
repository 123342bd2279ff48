#include "ruelle/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "detail.hpp"
#include "ruelle/error.hpp"

namespace ruelle {
namespace {

constexpr double kCollapseMass = 1e-12;

std::vector<double> scaled_masses(const CylinderFunction& g, const MarkovMeasure& rho) {
  auto m = rho.masses(g.layout());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] *= g.at(i);
  return m;
}

}  // namespace

RawMeasure::RawMeasure(std::shared_ptr<const WordLayout> layout, std::vector<double> masses)
    : layout_(std::move(layout)), masses_(std::move(masses)) {
  if (!layout_ || masses_.size() != layout_->size()) {
    throw Error(ErrorCode::kInvalidArgument, "raw measure needs one mass per admissible word");
  }
  for (double v : masses_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "masses must be finite and nonnegative");
    }
  }
}

double RawMeasure::mass(std::span<const Symbol> word) const {
  if (word.size() > static_cast<std::size_t>(depth())) {
    throw Error(ErrorCode::kDepthTooShallow, "raw measure of depth " + std::to_string(depth()) +
                                                 " cannot resolve a word of length " +
                                                 std::to_string(word.size()));
  }
  if (!shift().admissible(word)) {
    throw Error(ErrorCode::kInadmissibleWord, format_word(word, shift().alphabet_size()));
  }
  const auto [first, last] = layout_->prefix_range(word);
  return std::accumulate(masses_.begin() + static_cast<std::ptrdiff_t>(first),
                         masses_.begin() + static_cast<std::ptrdiff_t>(last), 0.0);
}

double RawMeasure::total() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

RawMeasure RawMeasure::coarsen(int depth) const {
  if (depth == this->depth()) return *this;
  auto to = shift().layout(depth);
  auto values = detail::coarsen(*layout_, masses_, *to);
  return RawMeasure(std::move(to), std::move(values));
}

DensityMeasure::DensityMeasure(CylinderFunction density, MarkovMeasure reference)
    : density_(std::move(density)), reference_(std::move(reference)) {
  if (!(density_.shift() == reference_.shift())) {
    throw Error(ErrorCode::kInvalidArgument, "density and reference live on different subshifts");
  }
  require_nonnegative(density_, "density");
}

double DensityMeasure::mass(std::span<const Symbol> word) const {
  if (word.size() >= static_cast<std::size_t>(density_.depth())) {
    return density_(word) * reference_.cylinder_mass(word);
  }
  if (!shift().admissible(word)) {
    throw Error(ErrorCode::kInadmissibleWord, format_word(word, shift().alphabet_size()));
  }
  const auto [first, last] = density_.layout().prefix_range(word);
  Word buffer(static_cast<std::size_t>(density_.depth()));
  double total = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    density_.layout().decode(i, buffer);
    total += density_.at(i) * reference_.cylinder_mass(buffer);
  }
  return total;
}

double DensityMeasure::total() const { return reference_.integrate(density_); }

RawMeasure DensityMeasure::to_raw(int depth) const {
  if (depth >= density_.depth()) {
    const auto fine = promote_depth(density_, depth);
    return RawMeasure(fine.layout_ptr(), scaled_masses(fine, reference_));
  }
  return RawMeasure(density_.layout_ptr(), scaled_masses(density_, reference_)).coarsen(depth);
}

double DensityMeasure::integrate(const CylinderFunction& g) const {
  return reference_.integrate(multiply(g, density_));
}

const Subshift& shift_of(const Measure& mu) {
  return std::visit([](const auto& m) -> const Subshift& { return m.shift(); }, mu);
}

double mass(const Measure& mu, std::span<const Symbol> word) {
  return std::visit([&](const auto& m) { return m.mass(word); }, mu);
}

double total_mass(const Measure& mu) {
  return std::visit([](const auto& m) { return m.total(); }, mu);
}

std::optional<int> resolution(const Measure& mu) {
  if (const auto* raw = std::get_if<RawMeasure>(&mu)) return raw->depth();
  return std::nullopt;
}

RawMeasure to_raw(const Measure& mu, int depth) {
  if (const auto* raw = std::get_if<RawMeasure>(&mu)) {
    if (depth > raw->depth()) {
      throw Error(ErrorCode::kDepthTooShallow, "raw measure of depth " +
                                                   std::to_string(raw->depth()) +
                                                   " cannot be refined to depth " +
                                                   std::to_string(depth));
    }
    return raw->coarsen(depth);
  }
  return std::get<DensityMeasure>(mu).to_raw(depth);
}

Measure weighted(const CylinderFunction& g, const Measure& mu) {
  if (const auto* density = std::get_if<DensityMeasure>(&mu)) {
    return DensityMeasure(multiply(g, density->density()), density->reference());
  }
  const auto& raw = std::get<RawMeasure>(mu);
  if (g.depth() > raw.depth()) {
    throw Error(ErrorCode::kDepthTooShallow, "raw measure of depth " + std::to_string(raw.depth()) +
                                                 " cannot carry a depth-" +
                                                 std::to_string(g.depth()) + " weight");
  }
  const auto gp = promote_depth(g, raw.depth());
  std::vector<double> masses(raw.masses().begin(), raw.masses().end());
  for (std::size_t i = 0; i < masses.size(); ++i) masses[i] *= gp.at(i);
  return RawMeasure(raw.layout_ptr(), std::move(masses));
}

double integrate(const Measure& mu, const CylinderFunction& g) {
  if (const auto* density = std::get_if<DensityMeasure>(&mu)) return density->integrate(g);
  const auto raw = to_raw(mu, g.depth());
  double total = 0.0;
  for (std::size_t i = 0; i < raw.masses().size(); ++i) total += g.at(i) * raw.masses()[i];
  return total;
}

DensityMeasure apply_TV(const CylinderFunction& weight, const DensityMeasure& mu) {
  return DensityMeasure(apply_transfer(weight, mu.density()), mu.reference());
}

RawMeasure apply_TV(const CylinderFunction& weight, const RawMeasure& mu) {
  require_nonnegative(weight, "weight");
  const int depth = mu.depth();
  if (depth < std::max(2, weight.depth())) {
    throw Error(ErrorCode::kDepthTooShallow,
                "raw T_V needs depth >= " + std::to_string(std::max(2, weight.depth())) +
                    ", got " + std::to_string(depth));
  }
  const auto out_layout = mu.shift().layout(depth - 1);
  std::vector<double> out(out_layout->size(), 0.0);
  Word y(static_cast<std::size_t>(depth));
  for (std::size_t i = 0; i < mu.layout().size(); ++i) {
    mu.layout().decode(i, y);
    out[out_layout->index_of(std::span<const Symbol>(y).subspan(1))] += weight(y) * mu.masses()[i];
  }
  return RawMeasure(out_layout, std::move(out));
}

Measure apply_TV(const CylinderFunction& weight, const Measure& mu) {
  return std::visit([&](const auto& m) -> Measure { return apply_TV(weight, m); }, mu);
}

double check_fixed_point(const CylinderFunction& weight, const Measure& mu, int depth) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 1");
  const auto fine = to_raw(mu, std::max(depth + 1, weight.depth()));
  const auto image = apply_TV(weight, fine).coarsen(depth);
  const auto base = fine.coarsen(depth);
  std::vector<double> diff(base.masses().begin(), base.masses().end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= image.masses()[i];
  return detail::max_cylinder_deviation(base.layout(), diff);
}

FixedDensityResult fixed_density_measure(const CylinderFunction& weight, const MarkovMeasure& rho,
                                         const HOptions& options) {
  auto h = iterate_to_h(weight, options);
  if (h.status == HStatus::kDegenerate) {
    throw Error(ErrorCode::kDegenerateH, "R_V^n(1) tends to 0 (sup h = " +
                                             std::to_string(sup_norm(h.h)) + ")");
  }
  auto nu = left_fixed_functional(weight);
  std::optional<double> nu_of_h;
  double factor = 0.0;
  if (nu) {
    nu_of_h = (*nu)(h.h);
    if (*nu_of_h > 0.0) factor = 1.0 / *nu_of_h;
  }
  if (factor == 0.0) factor = 1.0 / rho.integrate(h.h);
  h.h = scale(h.h, factor);
  DensityMeasure mu0(h.h, rho);
  return {std::move(mu0), std::move(h), std::move(nu), nu_of_h};
}

AveragingResult averaging_fixed_point(const CylinderFunction& weight, const DensityMeasure& seed,
                                      const AveragingOptions& options) {
  const double seed_total = seed.total();
  if (!(seed_total > 0.0)) throw Error(ErrorCode::kMassCollapse, "seed has zero mass");

  DensityMeasure current(scale(seed.density(), 1.0 / seed_total), seed.reference());
  std::vector<double> bounds{seed_total};
  double residual = check_fixed_point(weight, current, options.check_depth);
  if (residual < options.tol) return {current, residual, 0, false, bounds};

  CylinderFunction sum = current.density();
  for (int n = 1; n <= options.max_iter; ++n) {
    const DensityMeasure image = apply_TV(weight, current);
    const double step = image.total();
    bounds.push_back(bounds.back() * step);
    if (bounds.back() < kCollapseMass) {
      // Distance from the current iterate to its own renormalized image.
      const double normalized =
          step > 0.0 ? sup_distance(current.density(), scale(image.density(), 1.0 / step)) : 0.0;
      throw Error(ErrorCode::kMassCollapse,
                  "∫V^(n) d seed = " + std::to_string(bounds.back()) + " at n = " +
                      std::to_string(n) + "; renormalized residual " + std::to_string(normalized));
    }
    current = DensityMeasure(scale(image.density(), 1.0 / step), seed.reference());
    residual = check_fixed_point(weight, current, options.check_depth);
    if (residual < options.tol) return {current, residual, n, false, bounds};

    sum = add(sum, current.density());
    DensityMeasure average(scale(sum, 1.0 / (n + 1)), seed.reference());
    const double average_residual = check_fixed_point(weight, average, options.check_depth);
    if (average_residual < options.tol) {
      return {std::move(average), average_residual, n, true, bounds};
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              "no fixed point after " + std::to_string(options.max_iter) +
                  " steps; last residual " + std::to_string(residual));
}

std::vector<double> masses_along_orbit(const CylinderFunction& weight, const Measure& mu0,
                                       int n_max) {
  if (n_max < 0) throw Error(ErrorCode::kInvalidArgument, "n_max must be >= 0");
  std::vector<double> out{total_mass(mu0)};
  if (const auto* density = std::get_if<DensityMeasure>(&mu0)) {
    // ∫ V^(n) f d rho = ∫ R_V^n f d rho by strong invariance of rho.
    CylinderFunction g = density->density();
    for (int n = 1; n <= n_max; ++n) {
      g = apply_transfer(weight, g);
      out.push_back(density->reference().integrate(g));
    }
    return out;
  }
  for (int n = 1; n <= n_max; ++n) out.push_back(integrate(mu0, weight_product(weight, n)));
  return out;
}

double check_product_weight_identity(const CylinderFunction& v, const ConformalMeasure& nu_w,
                                     const CylinderFunction& f, int n, int depth) {
  if (n < 1 || depth < 1) throw Error(ErrorCode::kInvalidArgument, "need n >= 1 and depth >= 1");
  const Subshift& shift = nu_w.shift();

  const int start = std::max({depth + n, v.depth() + n - 1, f.depth()});
  const auto fine = promote_depth(f, start);
  auto masses = nu_w.masses(fine.layout());
  for (std::size_t i = 0; i < masses.size(); ++i) masses[i] *= fine.at(i);
  RawMeasure lhs(fine.layout_ptr(), std::move(masses));
  for (int i = 0; i < n; ++i) lhs = apply_TV(v, lhs);
  lhs = lhs.coarsen(depth);

  const auto g = apply_transfer_power(product_weight(v, nu_w.weight()), f, n);
  const auto gp = promote_depth(g, std::max(depth, g.depth()));
  auto rhs = nu_w.masses(gp.layout());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= gp.at(i);
  const auto rhs_coarse = detail::coarsen(gp.layout(), rhs, *shift.layout(depth));

  std::vector<double> diff(lhs.masses().begin(), lhs.masses().end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= rhs_coarse[i];
  return detail::max_cylinder_deviation(lhs.layout(), diff);
}

}  // namespace ruelle
