#include <gtest/gtest.h>

#include <numeric>

#include "bridge.hpp"
#include "oracle.hpp"
#include "ruelle/error.hpp"
#include "ruelle/reference_measure.hpp"

using namespace ruelle;
using bridge::w;

TEST(StronglyInvariant, FullShiftIsUniform) {
  const auto rho = strongly_invariant_measure(Subshift::full_shift(2));
  EXPECT_NEAR(rho.symbol_masses()[0], 0.5, 1e-15);
  EXPECT_NEAR(rho.symbol_masses()[1], 0.5, 1e-15);
  EXPECT_TRUE(rho.unique());
  EXPECT_NEAR(rho.cylinder_mass(w("121")), 0.125, 1e-15);
}

TEST(StronglyInvariant, GoldenMean) {
  const auto rho = strongly_invariant_measure(Subshift::golden_mean());
  EXPECT_NEAR(rho.symbol_masses()[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rho.symbol_masses()[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(rho.cylinder_mass(w("11")), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(rho.cylinder_mass(w("12")), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(rho.cylinder_mass(w("21")), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(rho.cylinder_mass(w("211")), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(rho.cylinder_mass(w("121")), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(rho.cylinder_mass(w("22")), Error);
}

TEST(StronglyInvariant, IdentityIsFlaggedNonUnique) {
  const auto rho = strongly_invariant_measure(Subshift::from_matrix({{1, 0}, {0, 1}}));
  EXPECT_FALSE(rho.unique());
  EXPECT_EQ(rho.eigenspace_dimension(), 2);
  EXPECT_NEAR(rho.symbol_masses()[0], 0.5, 1e-15);
  EXPECT_NEAR(rho.symbol_masses()[1], 0.5, 1e-15);
}

TEST(StronglyInvariant, BlockShiftMixesClosedClasses) {
  const auto rho = strongly_invariant_measure(
      Subshift::from_matrix({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}}));
  EXPECT_EQ(rho.eigenspace_dimension(), 2);
  for (double q : rho.symbol_masses()) EXPECT_NEAR(q, 0.25, 1e-15);
  EXPECT_LE(verify_strong_invariance(rho, 4), 1e-15);
}

TEST(VerifyStrongInvariance, Examples) {
  EXPECT_LE(verify_strong_invariance(strongly_invariant_measure(Subshift::full_shift(2)), 3), 1e-15);
  EXPECT_LE(verify_strong_invariance(strongly_invariant_measure(Subshift::golden_mean()), 2), 1e-15);
  const MarkovMeasure bad(Subshift::golden_mean(), {0.7, 0.3});
  EXPECT_NEAR(verify_strong_invariance(bad, 1), 0.05, 1e-12);
}

TEST(StronglyInvariant, RandomIrreducibleAgreesWithOracleAndPowerIteration) {
  oracle::Gen gen(101);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sys = gen.irreducible_system(4);
    const auto shift = bridge::to_shift(sys);
    const auto rho = strongly_invariant_measure(shift);
    ASSERT_TRUE(rho.unique());
    const auto q_oracle = oracle::stationary(sys);
    const auto q_power = power_iteration_fixed_vector(shift);
    for (int i = 0; i < sys.k; ++i) {
      EXPECT_NEAR(rho.symbol_masses()[i], q_oracle[i], 1e-12);
      EXPECT_NEAR(rho.symbol_masses()[i], q_power[i], 1e-12);
    }
    for (int d = 1; d <= 5; ++d) {
      EXPECT_LE(verify_strong_invariance(rho, d), 1e-12);
      const auto layout = shift.layout(d);
      const auto masses = rho.masses(*layout);
      EXPECT_NEAR(std::accumulate(masses.begin(), masses.end(), 0.0), 1.0, 1e-12);
      for (std::size_t i = 0; i < layout->size(); ++i) {
        const auto word = layout->word(i);
        EXPECT_NEAR(masses[i], oracle::rho_mass(sys, q_oracle, word), 1e-12);
        // back-consistency: rho([w]) = sum_a rho([w a])
        double ext = 0.0;
        for (int a = 0; a < sys.k; ++a) {
          if (!sys.allowed(word.back(), a)) continue;
          auto longer = word;
          longer.push_back(a);
          ext += rho.cylinder_mass(longer);
        }
        EXPECT_NEAR(masses[i], ext, 1e-12);
      }
    }
  }
}

TEST(MarkovMeasure, RejectsBadInput) {
  EXPECT_THROW(MarkovMeasure(Subshift::full_shift(2), {1.0}), Error);
  EXPECT_THROW(MarkovMeasure(Subshift::full_shift(2), {1.5, -0.5}), Error);
}
