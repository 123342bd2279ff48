#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ruelle/cylinder_function.hpp"
#include "ruelle/reference_measure.hpp"

namespace ruelle {

// Ruelle operator with weight V:
//
//   (R_V f)(x) = 1/c(x_1) * sum_{a : A(a, x_1) = 1} V(a x) f(a x).
//
// For V of depth m and f of depth d the result has depth max(m-1, d-1, 1).
// Throws kNegativeWeight.
CylinderFunction apply_transfer(const CylinderFunction& weight, const CylinderFunction& f);

// R_V^n f by repeated application.
CylinderFunction apply_transfer_power(const CylinderFunction& weight, const CylinderFunction& f,
                                      int n);

// Smallest depth closed under R_V: max(m-1, 1).
int closed_depth(const CylinderFunction& weight);

// R_V restricted to depth-d functions, acting on value vectors in layout order.
struct TransferMatrix {
  std::shared_ptr<const WordLayout> layout;
  Eigen::MatrixXd entries;

  int depth() const { return layout->depth(); }
  CylinderFunction apply(const CylinderFunction& f) const;
};

// Throws kDepthTooShallow when depth < closed_depth(weight).
TransferMatrix transfer_matrix(const CylinderFunction& weight, int depth);

struct HOptions {
  double tol = 1e-13;
  int max_iter = 10'000;
  // Allowed overshoot of sup R_V(1) above 1, and of h_{n+1} above h_n.
  double monotonicity_tol = 1e-12;
  double degenerate_threshold = 1e-9;
};

enum class HStatus { kConverged, kDegenerate };

struct HResult {
  CylinderFunction h;
  int iterations = 0;
  // sup |R_V h - h|
  double residual = 0.0;
  HStatus status = HStatus::kConverged;
  double sup_transfer_of_one = 0.0;
};

// Monotone iteration h_n = R_V^n(1) at closed_depth(V) until successive
// iterates differ by less than tol.
// Throws kNotSubNormalized, kMonotonicityViolation, kNoConvergence.
HResult iterate_to_h(const CylinderFunction& weight, const HOptions& options = {});

// A probability vector nu over the depth-d cylinders with nu(R_V f) = nu(f)
// for every depth-d function f.
struct FixedFunctional {
  std::shared_ptr<const WordLayout> layout;
  std::vector<double> weights;

  double operator()(const CylinderFunction& f) const;
};

// Left fixed vector of transfer_matrix(V, closed_depth(V)) when 1 is an
// eigenvalue (to 1e-10) with a nonnegative eigenvector.
std::optional<FixedFunctional> left_fixed_functional(const CylinderFunction& weight);

// | ∫ V^(n) f d rho - ∫ R_V^n f d rho |
double check_weight_pushforward(const CylinderFunction& weight, const CylinderFunction& f,
                                const MarkovMeasure& rho, int n);

// Pointwise V W at the common depth; R_{VW} = R_V composed with the W-weighting.
CylinderFunction product_weight(const CylinderFunction& v, const CylinderFunction& w);

// A measure nu_W with nu_W(R_W f) = nu_W(f). Its masses obey
//
//   nu_W([a w]) = W(a w) / c(w_1) * nu_W([w])   for |w| >= closed_depth(W),
//
// so it is pinned down by its marginal on closed_depth(W) cylinders. With W = 1
// this is the strongly invariant Markov measure.
class ConformalMeasure {
 public:
  ConformalMeasure(CylinderFunction weight, FixedFunctional base);

  static ConformalMeasure from_markov(const MarkovMeasure& rho);

  const CylinderFunction& weight() const { return weight_; }
  const Subshift& shift() const { return weight_.shift(); }

  // Throws kInadmissibleWord.
  double mass(std::span<const Symbol> word) const;
  std::vector<double> masses(const WordLayout& layout) const;

 private:
  CylinderFunction weight_;
  FixedFunctional base_;
};

// Built from left_fixed_functional(W); nullopt when that does not exist.
std::optional<ConformalMeasure> conformal_measure(const CylinderFunction& weight);

// max over cylinders of length <= depth of | nu([w]) - nu(R_W chi_[w]) |.
double check_conformal(const ConformalMeasure& nu, int depth);

}  // namespace ruelle
