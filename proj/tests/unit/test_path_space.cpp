#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <map>
#include <random>

#include "bridge.hpp"
#include "oracle.hpp"
#include "ruelle/error.hpp"
#include "ruelle/path_space.hpp"

using namespace ruelle;
using bridge::w;

namespace {

CylinderFunction depth1(const Subshift& s, std::vector<double> values) {
  return CylinderFunction(s.layout(1), std::move(values));
}

Measure uniform_density(const Subshift& s) {
  return DensityMeasure(CylinderFunction::constant(s, 1, 1.0), strongly_invariant_measure(s));
}

CylinderFunction markov_weight() {
  // V(a b) = 2 P(a, b) with P = [[1/3, 1/2], [2/3, 1/2]]
  const auto full = Subshift::full_shift(2);
  return CylinderFunction(full.layout(2), {2.0 / 3.0, 1.0, 4.0 / 3.0, 1.0});
}

// Random valid path measure: normalized or sub-normalized weight with its
// fixed density.
struct RandomCase {
  oracle::System sys;
  Subshift shift;
  oracle::Table vt;
  CylinderFunction v;
  PathMeasure pm;
};

std::optional<RandomCase> random_case(oracle::Gen& gen, int k_max) {
  const auto sys = gen.irreducible_system(k_max);
  const auto shift = bridge::to_shift(sys);
  const auto vt = gen.uniform() < 0.5 ? gen.normalized_weight(sys, gen.integer(2, 3))
                                      : gen.subnormalized_weight(sys, gen.integer(1, 2));
  const auto v = bridge::to_function(shift, vt);
  try {
    const auto fixed = fixed_density_measure(v, strongly_invariant_measure(shift));
    return RandomCase{sys, shift, vt, v, build_path_measure(v, Measure(fixed.mu0))};
  } catch (const Error&) {
    return std::nullopt;
  }
}

// mu_n masses at depth D by brute force: (V^(n) f0) d rho.
oracle::Table oracle_marginal(const oracle::System& sys, const oracle::Table& vt, const oracle::Table& f0,
                              int n, int d) {
  const auto q = oracle::stationary(sys);
  const auto density = n == 0 ? f0 : oracle::multiply(sys, oracle::weight_power(sys, vt, n), f0);
  const int fine = std::max(d, oracle::table_depth(density));
  return oracle::marginal(oracle::density_masses(sys, q, density, fine), d);
}

}  // namespace

TEST(BuildPathMeasure, Examples) {
  const auto full = Subshift::full_shift(2);
  EXPECT_NO_THROW(build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full)));
  EXPECT_NO_THROW(build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full)));
  const Measure two_chi = DensityMeasure(depth1(full, {2.0, 0.0}), strongly_invariant_measure(full));
  try {
    build_path_measure(depth1(full, {1.5, 0.5}), two_chi);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFixedPoint);
  }
}

TEST(Marginal, Examples) {
  const auto full = Subshift::full_shift(2);
  const auto pm1 = build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full));
  for (int n = 0; n <= 4; ++n) {
    const auto raw = to_raw(pm1.marginal(n), 3);
    for (double x : raw.masses()) EXPECT_NEAR(x, 0.125, 1e-15);
  }

  const auto pm = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  const auto m1 = to_raw(pm.marginal(1), 1);
  EXPECT_DOUBLE_EQ(m1.masses()[0], 0.75);
  EXPECT_DOUBLE_EQ(m1.masses()[1], 0.25);
  const auto m2 = to_raw(pm.marginal(2), 2);
  const std::vector<double> expected{9.0 / 16, 3.0 / 16, 3.0 / 16, 1.0 / 16};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(m2.masses()[i], expected[i]);
}

TEST(Marginal, MatchesOracleAndConservesMass) {
  oracle::Gen gen(40);
  int done = 0;
  while (done < 15) {
    auto c = random_case(gen, 3);
    if (!c) continue;
    ++done;
    const auto& mu0 = std::get<DensityMeasure>(c->pm.base());
    const auto f0 = bridge::to_table(mu0.density());
    for (int n = 0; n <= 4; ++n) {
      const auto raw = to_raw(c->pm.marginal(n), 3);
      EXPECT_LE(bridge::max_abs_diff(bridge::to_table(raw), oracle_marginal(c->sys, c->vt, f0, n, 3)), 1e-13);
      EXPECT_NEAR(total_mass(c->pm.marginal(n)), mu0.total(), 1e-10);
    }
  }
}

TEST(Marginal, RawBaseGivesRawMarginalsWhileResolved) {
  const auto full = Subshift::full_shift(2);
  const auto rho = to_raw(uniform_density(full), 4);
  const auto pm = build_path_measure(depth1(full, {1.5, 0.5}), Measure(rho));
  for (int n = 0; n <= 3; ++n) {
    const auto m = to_raw(pm.marginal(n), 4 - n);
    const auto dens = to_raw(build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full)).marginal(n), 4 - n);
    for (std::size_t i = 0; i < m.masses().size(); ++i) EXPECT_NEAR(m.masses()[i], dens.masses()[i], 1e-15);
  }
}

TEST(Consistency, ValidMeasuresAreConsistent) {
  const auto full = Subshift::full_shift(2);
  const auto unit = build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full));
  for (int n = 0; n <= 5; ++n) EXPECT_EQ(check_consistency(unit, n, 3), 0.0);

  oracle::Gen gen(41);
  int done = 0;
  while (done < 20) {
    auto c = random_case(gen, 3);
    if (!c) continue;
    ++done;
    for (int n = 0; n <= 6; ++n)
      for (int d = 1; d <= 4; ++d) EXPECT_LE(check_consistency(c->pm, n, d), 1e-12);
    EXPECT_LE(check_quasi_invariance(c->pm, 4, 6), 1e-12);
  }
}

TEST(Consistency, CorruptedMarginalResidualEqualsMovedMass) {
  const auto full = Subshift::full_shift(2);
  const auto pm = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  // move 0.1 of mass from [11] to [22] in mu_1
  auto m1 = to_raw(pm.marginal(1), 2);
  std::vector<double> moved(m1.masses().begin(), m1.masses().end());
  moved[0] -= 0.1;
  moved[3] += 0.1;
  const auto bad = pm.with_marginal_override(1, RawMeasure(m1.layout_ptr(), moved));
  EXPECT_TRUE(bad.has_overrides());
  EXPECT_NEAR(check_consistency(bad, 0, 1), 0.1, 1e-15);
}

TEST(QuasiInvariance, Examples) {
  const auto full = Subshift::full_shift(2);
  const auto unit = build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full));
  EXPECT_LE(check_quasi_invariance(unit, 4, 6), 1e-15);

  const auto pm = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  EXPECT_LE(check_quasi_invariance(pm, 4, 6), 1e-12);
  const auto corrupted = pm.with_marginal_override(1, uniform_density(full));
  EXPECT_NEAR(check_quasi_invariance(corrupted, 2, 3), 0.25, 1e-15);
}

TEST(Sampler, KernelEqualsMarkovMatrix) {
  const auto full = Subshift::full_shift(2);
  const auto pm = build_path_measure(markov_weight(), uniform_density(full));
  const PathSampler sampler(pm, 3, 2);
  const double p[2][2] = {{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}};
  const auto& layout = *full.layout(sampler.working_depth());
  for (int step = 0; step < 3; ++step) {
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto kern = sampler.kernel(step, i);
      ASSERT_EQ(kern.size(), 2u);
      const int first = layout.word(i)[0];
      for (int a = 0; a < 2; ++a) EXPECT_NEAR(kern[a], p[a][first], 1e-15);
    }
  }
}

TEST(Sampler, KernelsForConstantAndDepthOneWeights) {
  const auto full = Subshift::full_shift(2);
  const PathSampler uniform(build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full)), 2, 1);
  for (int step = 0; step < 2; ++step)
    for (std::size_t i = 0; i < 2; ++i)
      for (double x : uniform.kernel(step, i)) EXPECT_DOUBLE_EQ(x, 0.5);
  const PathSampler skew(build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full)), 3, 1);
  for (int step = 0; step < 3; ++step)
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_DOUBLE_EQ(skew.kernel(step, i)[0], 0.75);
      EXPECT_DOUBLE_EQ(skew.kernel(step, i)[1], 0.25);
    }
}

TEST(Sampler, KernelMatchesOracleRatios) {
  oracle::Gen gen(42);
  int done = 0;
  while (done < 10) {
    auto c = random_case(gen, 3);
    if (!c) continue;
    ++done;
    const auto f0 = bridge::to_table(std::get<DensityMeasure>(c->pm.base()).density());
    const PathSampler sampler(c->pm, 2, 2);
    const int dp = sampler.working_depth();
    const auto layout = c->shift.layout(dp);
    for (int step = 0; step < 2; ++step) {
      const auto cur = oracle_marginal(c->sys, c->vt, f0, step, dp);
      const auto next = oracle_marginal(c->sys, c->vt, f0, step + 1, dp + 1);
      for (std::size_t i = 0; i < layout->size(); ++i) {
        const auto word = layout->word(i);
        const auto kern = sampler.kernel(step, i);
        if (cur.at(word) <= 0.0) continue;
        double row = 0.0;
        for (int a = 0; a < c->sys.k; ++a) {
          const auto aw = oracle::cons(a, word);
          row += next.count(aw) ? next.at(aw) : 0.0;
        }
        for (int a = 0; a < c->sys.k; ++a) {
          const auto aw = oracle::cons(a, word);
          const double expected = next.count(aw) ? next.at(aw) / row : 0.0;
          EXPECT_NEAR(kern[a], expected, 1e-12);
        }
      }
    }
  }
}

TEST(Sampler, PathsAreAdmissibleAndReproducible) {
  const auto golden = Subshift::golden_mean();
  const auto v = CylinderFunction(golden.layout(2), {1.5, 1.0, 0.5});
  const auto pm = build_path_measure(v, Measure(fixed_density_measure(v, strongly_invariant_measure(golden)).mu0));
  const auto a = sample_paths(pm, 4, 2, 3000, 99, 1);
  const auto b = sample_paths(pm, 4, 2, 3000, 99, 4);
  const auto c = sample_paths(pm, 4, 2, 3000, 100, 1);
  ASSERT_EQ(a.size(), 3000u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].base, b[i].base);
    EXPECT_EQ(a[i].prepends, b[i].prepends);
    differs = differs || a[i].base != c[i].base || a[i].prepends != c[i].prepends;
    for (int n = 0; n <= 4; ++n) EXPECT_TRUE(golden.admissible(a[i].coordinate(n)));
    EXPECT_EQ(a[i].coordinate(4).size(), a[i].base.size() + 4);
  }
  EXPECT_TRUE(differs);
  const auto one = sample_path(pm, 4, 2, 7);
  const auto again = sample_path(pm, 4, 2, 7);
  EXPECT_EQ(one.base, again.base);
  EXPECT_EQ(one.prepends, again.prepends);
}

TEST(Sampler, ZeroMassConditioningIsReported) {
  // On the identity shift chi_[1] d rho is fixed by V = 1, so mu_1([2]) = 0.
  // Overriding mu_0 with rho lets the base land on [2].
  const auto id = Subshift::from_matrix({{1, 0}, {0, 1}});
  const auto rho = strongly_invariant_measure(id);
  const Measure mu0 = DensityMeasure(depth1(id, {1.0, 0.0}), rho);
  const auto pm = build_path_measure(CylinderFunction::constant(id, 1, 1.0), mu0)
                      .with_marginal_override(0, Measure(DensityMeasure(CylinderFunction::constant(id, 1, 1.0), rho)));
  const PathSampler sampler(pm, 2, 1);
  std::mt19937_64 gen(1);
  bool hit = false;
  for (int i = 0; i < 200 && !hit; ++i) {
    try {
      sampler.draw([&] { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); });
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kZeroMassConditioning);
      hit = true;
    }
  }
  EXPECT_TRUE(hit);
}

TEST(Empirical, UnitWeightAndSkewWeightPass) {
  const auto full = Subshift::full_shift(2);
  const auto unit = build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full));
  const auto r = empirical_check(unit, 3, 100000, 3, 2024);
  EXPECT_TRUE(r.pass) << r.worst_ratio;
  EXPECT_EQ(r.samples, 100000u);

  const auto skew = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  const auto s = empirical_check(skew, 1, 100000, 1, 2025);
  EXPECT_TRUE(s.pass) << s.worst_ratio;
  EXPECT_LT(s.max_deviation, 0.01);
}

TEST(Empirical, SwappedPrependProbabilitiesFail) {
  const auto full = Subshift::full_shift(2);
  const auto truth = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  const auto swapped = build_path_measure(depth1(full, {0.5, 1.5}), uniform_density(full));
  const auto samples = sample_paths(swapped, 1, 1, 100000, 5);
  const auto r = empirical_check(truth, samples, 1, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_deviation, 0.5, 0.01);
}

TEST(Martingale, Examples) {
  const auto full = Subshift::full_shift(2);
  const auto unit = build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full));
  const auto chi1 = depth1(full, {1.0, 0.0});
  const auto a = martingale_coordinates(unit, chi1, 1);
  ASSERT_EQ(a.levels.size(), 2u);
  for (double x : a.levels[0].values()) EXPECT_DOUBLE_EQ(x, 0.5);
  EXPECT_LE(sup_distance(a.levels[1], chi1), 1e-15);

  const auto skew = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  const auto b = martingale_coordinates(skew, chi1, 1);
  for (double x : b.levels[0].values()) EXPECT_DOUBLE_EQ(x, 0.75);

  const auto c = martingale_coordinates(skew, CylinderFunction::constant(full, 2, 2.5), 4);
  for (const auto& level : c.levels)
    for (double x : level.values()) EXPECT_NEAR(x, 2.5, 1e-14);
}

TEST(Martingale, TowerNormsAndOracle) {
  oracle::Gen gen(43);
  int done = 0;
  while (done < 12) {
    auto c = random_case(gen, 3);
    if (!c) continue;
    ++done;
    const auto f0 = bridge::to_table(std::get<DensityMeasure>(c->pm.base()).density());
    const int level = 4;
    const auto xi = bridge::to_function(c->shift, gen.table(c->sys, gen.integer(1, 3), -1.0, 1.0));
    const auto mc = martingale_coordinates(c->pm, xi, level);
    ASSERT_EQ(mc.levels.size(), static_cast<std::size_t>(level + 1));
    const int depth = mc.levels[0].depth();
    EXPECT_LE(sup_distance(mc.levels[level], promote_depth(xi, depth)), 1e-15);
    for (int n = 0; n < level; ++n) {
      EXPECT_LE(sup_distance(mc.levels[n], conditional_step(c->pm, mc.levels[n + 1], n)), 1e-13);
      EXPECT_LE(mc.norms[n], mc.norms[n + 1] + 1e-14);
    }
    // brute-force E_0 from the full prepend sum
    const auto xit = bridge::to_table(xi);
    const auto top = oracle_marginal(c->sys, c->vt, f0, level, depth + level);
    const auto base = oracle_marginal(c->sys, c->vt, f0, 0, depth);
    std::map<oracle::Word, double> sums;
    for (const auto& [u, m] : top) sums[oracle::Word(u.begin() + level, u.end())] += oracle::eval(xit, u) * m;
    for (std::size_t i = 0; i < mc.levels[0].size(); ++i) {
      const auto word = mc.levels[0].layout().word(i);
      const double expected = base.at(word) > 0 ? sums[word] / base.at(word) : 0.0;
      EXPECT_NEAR(mc.levels[0].at(i), expected, 1e-12);
    }
  }
}

TEST(Isometry, Examples) {
  const auto full = Subshift::full_shift(2);
  const auto pm = build_path_measure(depth1(full, {1.5, 0.5}), uniform_density(full));
  const ComplexCylinderFunction m(full.layout(1), {std::sqrt(1.5), std::sqrt(0.5)});
  EXPECT_LE(check_isometry(pm, m, 2, 1e-12, 4), 1e-14);
  const ComplexCylinderFunction phase(full.layout(1), {std::polar(std::sqrt(1.5), 0.7), std::polar(std::sqrt(0.5), -2.0)});
  EXPECT_LE(check_isometry(pm, phase, 3, 1e-12, 3), 1e-13);

  const auto unit = build_path_measure(CylinderFunction::constant(full, 1, 1.0), uniform_density(full));
  EXPECT_EQ(check_isometry(unit, ComplexCylinderFunction::constant(full, 1, 1.0), 3, 1e-12), 0.0);

  try {
    check_isometry(pm, ComplexCylinderFunction::constant(full, 1, 1.0), 2, 1e-12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFilterMismatch);
  }
}

TEST(Isometry, RandomWeightsWithSquareRootFilters) {
  oracle::Gen gen(44);
  int done = 0;
  while (done < 10) {
    auto c = random_case(gen, 3);
    if (!c) continue;
    ++done;
    std::vector<std::complex<double>> vals;
    for (double x : c->v.values()) vals.push_back(std::polar(std::sqrt(x), gen.uniform(0, 6.28)));
    const ComplexCylinderFunction m(c->v.layout_ptr(), vals);
    EXPECT_LE(check_isometry(c->pm, m, 2, 1e-12, 3), 1e-13);
  }
}
