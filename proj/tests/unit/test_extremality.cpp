#include <gtest/gtest.h>

#include "bridge.hpp"
#include "oracle.hpp"
#include "ruelle/error.hpp"
#include "ruelle/extremality.hpp"

using namespace ruelle;
using bridge::w;

namespace {

CylinderFunction depth1(const Subshift& s, std::vector<double> values) {
  return CylinderFunction(s.layout(1), std::move(values));
}

Measure uniform_density(const Subshift& s) {
  return DensityMeasure(CylinderFunction::constant(s, 1, 1.0), strongly_invariant_measure(s));
}

Subshift identity2() { return Subshift::from_matrix({{1, 0}, {0, 1}}); }

Subshift block_shift() {
  return Subshift::from_matrix({{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1}});
}

struct Fixture {
  oracle::System sys;
  Subshift shift;
  CylinderFunction v;
  DensityMeasure mu0;
};

std::optional<Fixture> random_fixture(oracle::Gen& gen) {
  const auto sys = gen.irreducible_system(3);
  const auto shift = bridge::to_shift(sys);
  const auto v = bridge::to_function(shift, gen.uniform() < 0.5 ? gen.normalized_weight(sys, 2)
                                                                : gen.subnormalized_weight(sys, gen.integer(1, 2)));
  try {
    return Fixture{sys, shift, v, fixed_density_measure(v, strongly_invariant_measure(shift)).mu0};
  } catch (const Error&) {
    return std::nullopt;
  }
}

void expect_valid_decomposition(const Measure& mu0, const CylinderFunction& v, const Decomposition& dec) {
  EXPECT_GT(dec.lambda, 0.0);
  EXPECT_LT(dec.lambda, 1.0);
  for (double x : dec.f1.values()) EXPECT_GE(x, -1e-15);
  for (double x : dec.f2.values()) EXPECT_GE(x, -1e-15);
  EXPECT_NEAR(integrate(mu0, dec.f1), 1.0, 1e-13);
  EXPECT_NEAR(integrate(mu0, dec.f2), 1.0, 1e-13);
  for (int d = 1; d <= 4; ++d) {
    const auto layout = shift_of(mu0).layout(d);
    for (std::size_t i = 0; i < layout->size(); ++i) {
      const auto word = layout->word(i);
      const double mix = dec.lambda * mass(dec.mu1, word) + (1.0 - dec.lambda) * mass(dec.mu2, word);
      EXPECT_NEAR(mix, mass(mu0, word), 1e-13);
    }
  }
  for (int d = 1; d <= 4; ++d) {
    EXPECT_LE(check_fixed_point(v, dec.mu1, d), 1e-11);
    EXPECT_LE(check_fixed_point(v, dec.mu2, d), 1e-11);
  }
}

}  // namespace

TEST(ConditionalExpectation, Examples) {
  const auto full = Subshift::full_shift(2);
  const auto g1 = conditional_expectation(uniform_density(full), depth1(full, {1.5, 0.5}),
                                          CylinderFunction::constant(full, 1, 1.0));
  for (double x : g1.values()) EXPECT_DOUBLE_EQ(x, 1.0);

  const auto g2 = conditional_expectation(uniform_density(full), CylinderFunction::constant(full, 1, 1.0),
                                          depth1(full, {0.2, 1.4}));
  for (double x : g2.values()) EXPECT_DOUBLE_EQ(x, 0.8);

  const auto id = identity2();
  const auto g3 = conditional_expectation(uniform_density(id), CylinderFunction::constant(id, 1, 1.0),
                                          depth1(id, {0.2, 1.4}));
  EXPECT_DOUBLE_EQ(g3(w("1")), 0.2);
  EXPECT_DOUBLE_EQ(g3(w("2")), 1.4);

  const Measure shallow = RawMeasure(full.layout(1), {0.5, 0.5});
  EXPECT_THROW(conditional_expectation(shallow, depth1(full, {1.5, 0.5}), depth1(full, {1.0, 0.0})), Error);
}

TEST(ConditionalExpectation, DefiningIdentityAndBound) {
  oracle::Gen gen(50);
  int done = 0;
  while (done < 25) {
    auto fx = random_fixture(gen);
    if (!fx) continue;
    ++done;
    const Measure mu0 = fx->mu0;
    const auto gt = gen.table(fx->sys, gen.integer(1, 3), -1.0, 1.0);
    const auto ft = gen.table(fx->sys, gen.integer(1, 3), -1.0, 1.0);
    const auto g = bridge::to_function(fx->shift, gt);
    const auto tilde = conditional_expectation(mu0, fx->v, g);
    EXPECT_LE(sup_norm(tilde), sup_norm(multiply(fx->v, g)) + 1e-12);

    // ∫ V g (f∘r) d mu0 = ∫ (g̃∘r)(f∘r) d mu0 by brute force over cylinders
    const auto vt = bridge::to_table(fx->v);
    const auto tt = bridge::to_table(tilde);
    const int big = std::max({oracle::table_depth(vt), oracle::table_depth(gt), oracle::table_depth(tt) + 1,
                              oracle::table_depth(ft) + 1});
    const auto masses = bridge::to_table(to_raw(mu0, big));
    double lhs = 0.0, rhs = 0.0;
    for (const auto& [y, m] : masses) {
      const oracle::Word tail(y.begin() + 1, y.end());
      lhs += oracle::eval(vt, y) * oracle::eval(gt, y) * oracle::eval(ft, tail) * m;
      rhs += oracle::eval(tt, tail) * oracle::eval(ft, tail) * m;
    }
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(RelativeErgodicity, Examples) {
  const auto full = Subshift::full_shift(2);
  const auto unit = relative_ergodicity_dimension(uniform_density(full), CylinderFunction::constant(full, 1, 1.0), 3);
  EXPECT_EQ(unit.solution_dim, 1);
  EXPECT_TRUE(unit.extremal_certificate);
  EXPECT_EQ(unit.depth, 3);

  const auto skew = relative_ergodicity_dimension(uniform_density(full), depth1(full, {1.5, 0.5}), 2);
  EXPECT_EQ(skew.solution_dim, 1);

  const auto id = identity2();
  const auto ident = relative_ergodicity_dimension(uniform_density(id), CylinderFunction::constant(id, 1, 1.0), 1);
  EXPECT_EQ(ident.solution_dim, 2);
  EXPECT_FALSE(ident.extremal_certificate);

  const auto block = block_shift();
  const auto b = relative_ergodicity_dimension(uniform_density(block), CylinderFunction::constant(block, 1, 1.0), 2);
  EXPECT_GE(b.solution_dim, 2);

  const Measure two_chi = DensityMeasure(depth1(full, {2.0, 0.0}), strongly_invariant_measure(full));
  try {
    relative_ergodicity_dimension(two_chi, depth1(full, {1.5, 0.5}), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFixedPoint);
  }
}

TEST(RelativeErgodicity, BasisSolvesSystemAndConstantsAlwaysDo) {
  oracle::Gen gen(51);
  int done = 0;
  while (done < 20) {
    auto fx = random_fixture(gen);
    if (!fx) continue;
    ++done;
    const Measure mu0 = fx->mu0;
    EXPECT_LE(ergodicity_residual(mu0, fx->v, CylinderFunction::constant(fx->shift, 2, 3.0)), 1e-12);
    for (int d = 1; d <= 3; ++d) {
      const auto r = relative_ergodicity_dimension(mu0, fx->v, d);
      EXPECT_GE(r.solution_dim, 1);
      EXPECT_EQ(r.basis.size(), static_cast<std::size_t>(r.solution_dim));
      EXPECT_EQ(r.extremal_certificate, r.solution_dim == 1);
      EXPECT_LE(r.max_basis_residual, 1e-10);
      for (const auto& f : r.basis) EXPECT_LE(ergodicity_residual(mu0, fx->v, f), 1e-10);
    }
  }
}

TEST(Decompose, ExtremalGivesNothing) {
  const auto full = Subshift::full_shift(2);
  EXPECT_FALSE(decompose(uniform_density(full), CylinderFunction::constant(full, 1, 1.0), 3));
}

TEST(Decompose, IdentitySplitsIntoPointMasses) {
  const auto id = identity2();
  const auto v = CylinderFunction::constant(id, 1, 1.0);
  const auto mu0 = uniform_density(id);
  const auto dec = decompose(mu0, v, 1);
  ASSERT_TRUE(dec);
  expect_valid_decomposition(mu0, v, *dec);
  // mu1 sits on one fixed point
  const double a = mass(dec->mu1, w("1")), b = mass(dec->mu1, w("2"));
  EXPECT_NEAR(std::min(a, b), 0.0, 1e-15);
  EXPECT_NEAR(std::max(a, b), 1.0, 1e-15);
  EXPECT_NEAR(dec->lambda, 0.25, 1e-15);
}

TEST(Decompose, BlockShiftSplitsAlongBlocks) {
  const auto block = block_shift();
  const auto v = CylinderFunction::constant(block, 1, 1.0);
  const auto mu0 = uniform_density(block);
  for (int d = 1; d <= 3; ++d) {
    const auto dec = decompose(mu0, v, d);
    ASSERT_TRUE(dec);
    expect_valid_decomposition(mu0, v, *dec);
  }
}

TEST(Decompose, WeightedBlockShift) {
  // Different normalized weights on each block keep both blocks invariant.
  const auto block = block_shift();
  oracle::Gen gen(52);
  const auto sys = bridge::to_system(block);
  const auto v = bridge::to_function(block, gen.normalized_weight(sys, 2));
  const Measure mu0 = fixed_density_measure(v, strongly_invariant_measure(block)).mu0;
  const auto dec = decompose(mu0, v, 2);
  ASSERT_TRUE(dec);
  expect_valid_decomposition(mu0, v, *dec);
}
