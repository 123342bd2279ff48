#pragma once

#include <span>
#include <vector>

#include "ruelle/cylinder_function.hpp"
#include "ruelle/subshift.hpp"

namespace ruelle {

// Markov measure on X(A) determined by single-symbol masses q and the
// front-extension rule
//
//   rho([a w]) = A(a, w_1) / c(w_1) * rho([w]),
//
// i.e. rho([w]) = q(w_d) * prod_{i<d} A(w_i, w_{i+1}) / c(w_{i+1}).
// When q = M q with M(i,j) = A(i,j)/c(j) this is the strongly r-invariant
// measure; the class itself accepts any probability vector so that broken
// candidates can be checked.
class MarkovMeasure {
 public:
  MarkovMeasure(Subshift shift, std::vector<double> symbol_masses, int eigenspace_dimension = 1);

  const Subshift& shift() const { return shift_; }
  std::span<const double> symbol_masses() const { return q_; }

  // Dimension of the eigenvalue-1 eigenspace of M found at construction.
  int eigenspace_dimension() const { return eigenspace_dimension_; }
  bool unique() const { return eigenspace_dimension_ == 1; }

  // Throws kInadmissibleWord.
  double cylinder_mass(std::span<const Symbol> word) const;

  // Masses of every word of the layout, in layout order.
  std::vector<double> masses(const WordLayout& layout) const;

  double integrate(const CylinderFunction& f) const;

 private:
  Subshift shift_;
  std::vector<double> q_;
  int eigenspace_dimension_;
};

// Solves q = M q, sum q = 1 directly. For reducible A with several closed
// classes the result is the uniform mixture of the per-class fixed vectors
// and eigenspace_dimension() > 1.
MarkovMeasure strongly_invariant_measure(const Subshift& shift);

// Lazy power iteration q <- (q + M q)/2 from the uniform vector. Independent
// cross-check for the direct solve.
std::vector<double> power_iteration_fixed_vector(const Subshift& shift, double tol = 1e-15,
                                                 int max_iter = 1'000'000);

// max over cylinders [w] of length <= depth of
//   | rho([w]) - ∫ (1/#r^{-1}(x)) sum_{r(y)=x} chi_[w](y) d rho(x) |.
double verify_strong_invariance(const MarkovMeasure& rho, int depth);

}  // namespace ruelle
