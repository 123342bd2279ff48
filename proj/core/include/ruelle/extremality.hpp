#pragma once

#include <optional>
#include <vector>

#include "ruelle/cylinder_function.hpp"
#include "ruelle/measure.hpp"

namespace ruelle {

// g̃ with E_mu0(V g | r^{-1}B) = g̃∘r at the depth M = max(depth V, depth g):
//
//   g̃(w) = sum_a (V g)(a w) mu0([a w]) / sum_a mu0([a w]),
//
// and 0 where the denominator vanishes. Needs mu0 at depth M + 1.
CylinderFunction conditional_expectation(const Measure& mu0, const CylinderFunction& weight,
                                         const CylinderFunction& g);

// max_w | E(V f)~(w) - E(V)~(w) f(w) | over words of depth max(depth V, depth f).
double ergodicity_residual(const Measure& mu0, const CylinderFunction& weight,
                           const CylinderFunction& f);

struct ErgodicityReport {
  int depth = 0;
  int solution_dim = 0;
  // Orthonormal (in value coordinates) basis of the depth-d solutions; zero
  // on cylinders that carry no mass under mu0 or mu0∘r^{-1}.
  std::vector<CylinderFunction> basis;
  bool extremal_certificate = false;
  std::vector<double> singular_values;
  double max_basis_residual = 0.0;
};

// Depth-d solutions f of E_mu0(V f) = E_mu0(V) f∘r. Each equation is
// multiplied through by its denominator sum_a mu0([a w]), which makes the
// system linear in the values of f; null directions are singular values
// below 1e-10 times the largest.
// Throws kNotFixedPoint when check_fixed_point(V, mu0, depth) > tol.
ErgodicityReport relative_ergodicity_dimension(const Measure& mu0, const CylinderFunction& weight,
                                               int depth, double tol = 1e-10);

struct Decomposition {
  double lambda = 0.0;
  CylinderFunction f1;
  CylinderFunction f2;
  // mu0 = lambda mu1 + (1 - lambda) mu2 with mu_i = f_i d mu0.
  Measure mu1;
  Measure mu2;
  ErgodicityReport report;
};

// nullopt when the depth-d report certifies extremality. Otherwise f1 is
// built from the basis vector farthest from its mu0-mean, shifted to be
// nonnegative and scaled to ∫ f1 d mu0 = 1; lambda = 1 / (2 sup f1) and
// f2 = (1 - lambda f1) / (1 - lambda).
std::optional<Decomposition> decompose(const Measure& mu0, const CylinderFunction& weight,
                                       int depth, double tol = 1e-10);

}  // namespace ruelle
