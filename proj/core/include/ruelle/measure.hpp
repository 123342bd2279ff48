#pragma once

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ruelle/cylinder_function.hpp"
#include "ruelle/reference_measure.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

// Masses of the depth-d cylinders. Only masses of cylinders of length <= d
// are determined; nothing finer is ever invented.
class RawMeasure {
 public:
  // Throws kInvalidArgument on a size mismatch or a negative mass.
  RawMeasure(std::shared_ptr<const WordLayout> layout, std::vector<double> masses);

  const Subshift& shift() const { return layout_->shift(); }
  int depth() const { return layout_->depth(); }
  const WordLayout& layout() const { return *layout_; }
  const std::shared_ptr<const WordLayout>& layout_ptr() const { return layout_; }
  std::span<const double> masses() const& { return masses_; }
  std::span<const double> masses() const&& = delete;

  // Mass of [w] for 1 <= |w| <= depth(). Throws kDepthTooShallow for longer
  // words and kInadmissibleWord.
  double mass(std::span<const Symbol> word) const;
  double total() const;
  // Marginal on a coarser depth.
  RawMeasure coarsen(int depth) const;

 private:
  std::shared_ptr<const WordLayout> layout_;
  std::vector<double> masses_;
};

// f d rho for a nonnegative cylinder function f.
class DensityMeasure {
 public:
  DensityMeasure(CylinderFunction density, MarkovMeasure reference);

  const Subshift& shift() const { return density_.shift(); }
  const CylinderFunction& density() const { return density_; }
  const MarkovMeasure& reference() const { return reference_; }

  // Defined for every admissible word regardless of length.
  double mass(std::span<const Symbol> word) const;
  double total() const;
  RawMeasure to_raw(int depth) const;
  // ∫ g f d rho
  double integrate(const CylinderFunction& g) const;

 private:
  CylinderFunction density_;
  MarkovMeasure reference_;
};

using Measure = std::variant<RawMeasure, DensityMeasure>;

const Subshift& shift_of(const Measure& mu);
double mass(const Measure& mu, std::span<const Symbol> word);
double total_mass(const Measure& mu);
// Finest depth at which a raw measure is known; nullopt for densities.
std::optional<int> resolution(const Measure& mu);
// Throws kDepthTooShallow if a raw measure is coarser than `depth`.
RawMeasure to_raw(const Measure& mu, int depth);
// g d mu. A raw mu must resolve g; the result keeps mu's depth.
Measure weighted(const CylinderFunction& g, const Measure& mu);
double integrate(const Measure& mu, const CylinderFunction& g);

// T_V(mu) = (V d mu)∘r^{-1}.
//
// Density route: T_V(f d rho) = (R_V f) d rho, valid because rho is strongly
// invariant. Raw route: T_V(mu)([w]) = sum_a ∫_[a w] V d mu, which needs
// depth(mu) >= max(2, depth(V)) and returns masses one level coarser.
// Throws kDepthTooShallow, kNegativeWeight.
DensityMeasure apply_TV(const CylinderFunction& weight, const DensityMeasure& mu);
RawMeasure apply_TV(const CylinderFunction& weight, const RawMeasure& mu);
Measure apply_TV(const CylinderFunction& weight, const Measure& mu);

// max over cylinders of length <= depth of | mu([w]) - ∫ chi_[w]∘r V d mu |.
// Throws kDepthTooShallow when a raw mu is coarser than max(depth+1, depth(V)).
double check_fixed_point(const CylinderFunction& weight, const Measure& mu, int depth);

struct FixedDensityResult {
  DensityMeasure mu0;
  HResult h;
  std::optional<FixedFunctional> nu;
  // nu(h) before rescaling, when nu exists.
  std::optional<double> nu_of_h;
};

// mu0 = h_V d rho. h_V is scaled so nu_V(h_V) = 1 when nu_V exists and
// nu_V(h_V) > 0, otherwise so that mu0(X) = 1.
// Throws kDegenerateH plus everything iterate_to_h throws.
FixedDensityResult fixed_density_measure(const CylinderFunction& weight, const MarkovMeasure& rho,
                                         const HOptions& options = {});

struct AveragingOptions {
  int max_iter = 10'000;
  double tol = 1e-12;
  int check_depth = 3;
};

struct AveragingResult {
  DensityMeasure mu0;
  double residual = 0.0;
  int n_used = 0;
  // True when the Cesàro average met tol before the plain iterate did.
  bool from_average = false;
  // ∫ V^(n) d seed for n = 0, 1, ..., n_used.
  std::vector<double> bounds;
};

// Renormalized iteration mu <- T_V(mu) / |T_V(mu)| from the seed, tracking
// Cesàro averages; stops once either meets tol under check_fixed_point.
// Throws kMassCollapse when ∫ V^(n) d seed drops below 1e-12 and
// kNoConvergence after max_iter steps.
AveragingResult averaging_fixed_point(const CylinderFunction& weight, const DensityMeasure& seed,
                                      const AveragingOptions& options = {});

// mu_n(X) = ∫ V^(n) d mu0 for n = 0, ..., n_max.
std::vector<double> masses_along_orbit(const CylinderFunction& weight, const Measure& mu0,
                                       int n_max);

// max over cylinders of length <= depth of
//   | T_V^n(f d nu_W)([w]) - ((R_{VW}^n f) d nu_W)([w]) |,
// the left side by the raw route.
double check_product_weight_identity(const CylinderFunction& v, const ConformalMeasure& nu_w,
                                     const CylinderFunction& f, int n, int depth);

}  // namespace ruelle
