#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ruelle/cylinder_function.hpp"
#include "ruelle/measure.hpp"

namespace ruelle {

// The path measure on sequences (x_0, x_1, ...) with r(x_{n+1}) = x_n,
// represented through its marginals mu_n = V^(n) d mu0 (the law of x_n).
// Nothing infinite is ever built; every statement reduces to marginals.
class PathMeasure {
 public:
  PathMeasure(CylinderFunction weight, Measure base);

  const CylinderFunction& weight() const { return weight_; }
  const Measure& base() const { return base_; }
  const Subshift& shift() const { return weight_.shift(); }

  // mu_n; n = 0 is the base. A raw base yields raw marginals at its own
  // depth, so only levels with depth(V) + n - 1 <= depth(mu0) exist.
  Measure marginal(int n) const;

  // Replaces one marginal by an arbitrary measure, bypassing the product
  // rule. Used to build deliberately inconsistent families.
  PathMeasure with_marginal_override(int n, Measure mu) const;
  bool has_overrides() const { return !overrides_.empty(); }

 private:
  CylinderFunction weight_;
  Measure base_;
  std::map<int, Measure> overrides_;
};

// Validates T_V(mu0) = mu0 at check_depth. Throws kNotFixedPoint.
PathMeasure build_path_measure(const CylinderFunction& weight, const Measure& mu0,
                               double tol = 1e-10, int check_depth = 3);

// max over cylinders of length <= depth of | mu_{n+1}(r^{-1}[w]) - mu_n([w]) |.
double check_consistency(const PathMeasure& pm, int n, int depth);

// Largest residual of the fixed-point identity for mu0 and of
// d mu_{n+1} = (V∘r^n) d mu_n for n = 0..n_max, over cylinders of length <= depth.
double check_quasi_invariance(const PathMeasure& pm, int depth, int n_max);

// base is x_0 truncated to the working depth; prepends[i] is the symbol
// added in step i+1, so x_n begins with prepends[n-1] ... prepends[0] base.
struct PathSample {
  Word base;
  Word prepends;

  // x_n truncated to |base| + n symbols.
  Word coordinate(int n) const;
};

// Conditional prepend tables for a fixed number of steps. The working depth
// is max(D, depth V, depth of a density base) so every ratio
// mu_{k+1}([a w]) / mu_k([w]) is read off exactly.
class PathSampler {
 public:
  PathSampler(const PathMeasure& pm, int steps, int base_depth);

  int steps() const { return steps_; }
  int working_depth() const { return layout_->depth(); }

  // u is consumed in sequence from `uniform`. Throws kZeroMassConditioning.
  template <typename Uniform>
  PathSample draw(Uniform&& uniform) const;

  // p(a | w) for step k indexed by symbol; empty when mu_k([w]) = 0.
  std::span<const double> kernel(int step, std::size_t word_index) const;

 private:
  std::shared_ptr<const WordLayout> layout_;
  int steps_;
  int k_;
  std::vector<double> base_cdf_;
  // [step][word * k + symbol]; rows of a zero-mass word hold -1.
  std::vector<std::vector<double>> kernels_;

  std::size_t pick_base(double u) const;
  Symbol pick_prepend(int step, std::size_t word_index, double u, std::span<const Symbol> w) const;
};

// One path with an mt19937_64 stream seeded from `seed`.
PathSample sample_path(const PathMeasure& pm, int steps, int base_depth, std::uint64_t seed);

// Samples in fixed blocks; block b uses a stream seeded from (seed, b), so
// the result does not depend on the number of workers.
std::vector<PathSample> sample_paths(const PathMeasure& pm, int steps, int base_depth,
                                     std::size_t count, std::uint64_t seed, int workers = 1);

struct EmpiricalReport {
  int n = 0;
  std::size_t samples = 0;
  int depth = 0;
  double max_deviation = 0.0;
  // 3 sqrt(p(1-p)/N) at the cylinder with the largest deviation.
  double sigma_bound = 0.0;
  // Largest deviation / (3 sigma) over all cylinders; pass iff <= 1.
  double worst_ratio = 0.0;
  bool pass = true;
};

// Frequencies of the cylinders of length 1..depth among x_n compared with
// mu_n normalized to a probability.
EmpiricalReport empirical_check(const PathMeasure& pm, const std::vector<PathSample>& samples,
                                int n, int depth);
EmpiricalReport empirical_check(const PathMeasure& pm, int n, std::size_t samples, int depth,
                                std::uint64_t seed, int workers = 1);

struct MartingaleCoordinates {
  // levels[n] = E_n(xi∘theta_N), n = 0..N, all at one common depth.
  std::vector<CylinderFunction> levels;
  // ||E_n||_{L^2(mu_n)}
  std::vector<double> norms;
};

// E_n(xi∘theta_N)(w) = sum_s xi(s w) mu_N([s w]) / mu_n([w]) over prepend
// strings s of length N - n; zero-mass cylinders get 0.
MartingaleCoordinates martingale_coordinates(const PathMeasure& pm, const CylinderFunction& xi,
                                             int level);

// One conditional step: E_n(g∘theta_{n+1}) from a level n+1 function g.
CylinderFunction conditional_step(const PathMeasure& pm, const CylinderFunction& g, int n);

// For every cylinder [w] of length <= depth and level n = 0..max_level:
//   | ∫ |m|^2(r^n y) chi_[w](r y) d mu_n(y) - mu_n([w]) |,
// the finite form of ∫ |m∘theta_0|^2 |f∘r̂|^2 = ∫ |f|^2 for f = chi_[w]∘theta_n.
// Throws kFilterMismatch if sup | |m|^2 - V | > tol.
double check_isometry(const PathMeasure& pm, const ComplexCylinderFunction& filter, int depth,
                      double tol, int max_level = 0);

template <typename Uniform>
PathSample PathSampler::draw(Uniform&& uniform) const {
  PathSample sample;
  const std::size_t base_index = pick_base(uniform());
  sample.base = layout_->word(base_index);
  Word current = sample.base;
  std::size_t index = base_index;
  sample.prepends.reserve(static_cast<std::size_t>(steps_));
  for (int step = 0; step < steps_; ++step) {
    const Symbol a = pick_prepend(step, index, uniform(), current);
    sample.prepends.push_back(a);
    std::rotate(current.rbegin(), current.rbegin() + 1, current.rend());
    current[0] = a;
    index = layout_->index_of(current);
  }
  return sample;
}

}  // namespace ruelle
