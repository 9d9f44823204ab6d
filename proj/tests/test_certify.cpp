#include <gtest/gtest.h>

#include <random>

#include "gcantor/certify.hpp"
#include "gcantor/littlewood.hpp"
#include "gcantor/rules.hpp"
#include "test_support.hpp"

using namespace gcantor;
using namespace gcantor::testing;

TEST(TSequence, MiddleThirdIsTwo) {
  TSequence t = t_sequence(constant_schedule(3, 1), 20);
  ASSERT_EQ(t.values.size(), 21u);
  for (const auto& v : t.values) {
    EXPECT_TRUE(v.is_point());
    EXPECT_EQ(v.lo, 2);
  }
}

TEST(TSequence, HandEvaluatedExample) {
  TSequence t = t_sequence(constant_schedule(5, 1, 2), 2);
  EXPECT_EQ(t.at(0).lo, 4);
  EXPECT_EQ(t.at(1).lo, Rational(7, 2));
  EXPECT_EQ(t.at(2).lo, Rational(24, 7));
}

TEST(TSequence, ZeroBudgetsGiveBranching) {
  TSequence t = t_sequence(explicit_schedule({2, 7, 3, 9}, {}), 5);
  const std::vector<long> expect{2, 7, 3, 9, 9, 9};
  for (std::size_t n = 0; n < expect.size(); ++n) EXPECT_EQ(t.at(n).lo, expect[n]);
}

TEST(TSequence, StopsAtFirstNonpositiveTerm) {
  auto s = explicit_schedule({3}, {{{0, 0}, Rational(3)}, {{0, 1}, Rational(1)}});
  TSequence t = t_sequence(s, 5);
  ASSERT_TRUE(t.first_nonpositive.has_value());
  EXPECT_EQ(*t.first_nonpositive, 0u);
  EXPECT_EQ(t.values.size(), 1u);
  EXPECT_EQ(t.at(0).lo, 0);
  EXPECT_THROW(t.at(1), DegenerateRecursion);
  try {
    t.at(3);
  } catch (const DegenerateRecursion& e) {
    EXPECT_EQ(e.index, 0u);
  }
}

TEST(TSequence, IncreasingBudgetsNeverIncreaseTerms) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> R;
    for (int i = 0; i < 6; ++i) R.push_back(3 + rng() % 6);
    std::map<std::pair<std::size_t, std::size_t>, Rational> e;
    for (std::size_t n = 0; n < 6; ++n) {
      for (std::size_t m = 0; m <= n; ++m) {
        if (rng() % 3 == 0) e[{m, n}] = Rational(static_cast<long>(rng() % 4), 4);
      }
    }
    auto bigger = e;
    const std::size_t n = rng() % 6, m = rng() % (n + 1);
    bigger[{m, n}] += Rational(1, 3);
    TSequence a = t_sequence(explicit_schedule(R, e), 5);
    TSequence b = t_sequence(explicit_schedule(R, bigger), 5);
    const std::size_t common = std::min(a.values.size(), b.values.size());
    for (std::size_t i = 0; i < common; ++i) EXPECT_LE(b.values[i].lo, a.values[i].lo);
    if (b.values.size() > a.values.size()) ADD_FAILURE() << "larger budgets ran longer";
  }
}

TEST(NonEmptiness, Examples) {
  NonEmptinessCertificate mt = certify_nonempty(constant_schedule(3, 1), 10);
  EXPECT_TRUE(mt.pass);
  for (std::size_t n = 0; n <= 10; ++n) {
    EXPECT_EQ(mt.survivor_lower_bounds[n], Rational(1L << n));
  }
  NonEmptinessCertificate dead = certify_nonempty(constant_schedule(3, 3), 4);
  EXPECT_FALSE(dead.pass);
  EXPECT_EQ(dead.first_failure, 0u);
}

TEST(NonEmptiness, LittlewoodScheduleDepthFifty) {
  auto p = InstanceParams::make(1u << 18, pow_rational(Rational(2), -27),
                                pow_rational(Rational(2), -80), Variant::kProp1,
                                DSequence::constant(2));
  NonEmptinessCertificate c = certify_nonempty(littlewood_schedule(p), 50);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.t_values.size(), 51u);
}

// Passing certificates bound every adversarial build from below, and the
// per-level ratio bound holds.
TEST(NonEmptiness, AdversarialBuildsRespectBounds) {
  std::mt19937_64 rng(101);
  int passing = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t depth = 2 + rng() % 5;
    std::vector<std::uint64_t> R;
    for (std::size_t i = 0; i < depth; ++i) R.push_back(2 + rng() % 5);
    std::map<std::pair<std::size_t, std::size_t>, Rational> e;
    for (std::size_t n = 0; n < depth; ++n) {
      for (std::size_t m = 0; m <= n; ++m) {
        if (rng() % 2) e[{m, n}] = Rational(static_cast<long>(rng() % 3));
      }
    }
    auto s = explicit_schedule(R, e);
    NonEmptinessCertificate cert = certify_nonempty(s, depth);
    if (!cert.pass) continue;
    ++passing;
    for (int order = 0; order < 3; ++order) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        BuildResult b = build(s, saturating_rule(static_cast<SaturationOrder>(order), seed), depth);
        ASSERT_FALSE(b.empty_level.has_value());
        for (std::size_t n = 0; n <= depth; ++n) {
          Rational count(static_cast<unsigned long>(b.levels[n].size()));
          EXPECT_GE(count, ceil_rational(cert.survivor_lower_bounds[n]));
          if (n >= 1) {
            Rational prev(static_cast<unsigned long>(b.levels[n - 1].size()));
            EXPECT_GE(count, cert.t_values[n - 1].lo * prev);
          }
        }
      }
    }
  }
  EXPECT_GT(passing, 20);
}

TEST(DimensionCondition, BoundaryPasses) {
  DimensionCertificate c = check_dimension_condition(constant_schedule(4, 1), 12);
  EXPECT_TRUE(c.pass);
  EXPECT_TRUE(c.branching_at_least_4);
  for (const auto& row : c.rows) {
    EXPECT_EQ(row.lhs.lo, 1);
    EXPECT_EQ(row.rhs, 1);
  }
}

TEST(DimensionCondition, MiddleThirdFailsOnBranching) {
  DimensionCertificate c = check_dimension_condition(constant_schedule(3, 1), 5);
  EXPECT_FALSE(c.pass);
  EXPECT_FALSE(c.branching_at_least_4);
  EXPECT_EQ(c.first_failure, 0u);
}

TEST(DimensionCondition, OversizedBudgetFails) {
  DimensionCertificate c = check_dimension_condition(constant_schedule(4, 2), 3);
  EXPECT_FALSE(c.pass);
  EXPECT_TRUE(c.branching_at_least_4);
}

TEST(DimensionCondition, WeightsUseEarlierBranching) {
  // r_{0,2} = 1 weighs 4/R_1 * 4/R_0 = 16/40.
  auto s = explicit_schedule({5, 8, 4}, {{{0, 2}, Rational(1)}});
  DimensionCertificate c = check_dimension_condition(s, 2);
  EXPECT_EQ(c.rows[2].lhs.lo, Rational(2, 5));
  EXPECT_TRUE(c.pass);
}

TEST(DimensionCondition, LittlewoodSchedulesToDepthThousand) {
  auto p1 = InstanceParams::make(162755, pow_rational(Rational(2), -40),
                                 pow_rational(Rational(2), -120), Variant::kProp1,
                                 DSequence::constant(2));
  DimensionCertificate a = check_dimension_condition(littlewood_schedule(p1), 1000);
  EXPECT_TRUE(a.pass);
  auto p2 = InstanceParams::make(8104, pow_rational(Rational(2), -40),
                                 pow_rational(Rational(2), -120), Variant::kProp2,
                                 DSequence::doubling());
  DimensionCertificate b = check_dimension_condition(littlewood_schedule(p2), 1000);
  EXPECT_TRUE(b.pass);
}

TEST(DimensionBound, ConstantFourIsOneHalf) {
  auto s = constant_schedule(4, 1);
  DimensionBound b = dimension_lower_bound(s, check_dimension_condition(s, 10));
  EXPECT_TRUE(b.rigorous);
  EXPECT_EQ(b.bound.lo, Rational(1, 2));
  EXPECT_EQ(b.bound.hi, Rational(1, 2));
}

TEST(DimensionBound, GrowingBranchingApproachesOne) {
  auto p = InstanceParams::make(1u << 18, pow_rational(Rational(2), -27),
                                pow_rational(Rational(2), -80), Variant::kProp1,
                                DSequence::constant(2));
  auto s = littlewood_schedule(p);
  DimensionBound b10 = dimension_lower_bound(s, check_dimension_condition(s, 10));
  DimensionBound b100 = dimension_lower_bound(s, check_dimension_condition(s, 100));
  EXPECT_TRUE(b100.rigorous);
  EXPECT_GT(b100.bound.lo, b10.bound.hi);
  EXPECT_GT(b100.bound.lo, Rational(9, 10));
  EXPECT_LT(b100.bound.hi, 1);
}

TEST(DimensionBound, NonMonotoneIsEmpirical) {
  auto s = explicit_schedule({16, 4, 16, 4, 16, 4, 8}, {});
  DimensionBound b = dimension_lower_bound(s, check_dimension_condition(s, 3));
  EXPECT_FALSE(b.rigorous);
  EXPECT_EQ(b.bound.lo, Rational(1, 2));
  DimensionBound past = dimension_lower_bound(s, check_dimension_condition(s, 8));
  EXPECT_TRUE(past.rigorous);  // constant 8 past the list
  EXPECT_EQ(past.bound.lo, Rational(2, 3));
  EXPECT_EQ(past.horizon_minimum.lo, Rational(1, 2));
}

TEST(DimensionBound, RequiresPassingCertificate) {
  auto s = constant_schedule(3, 1);
  EXPECT_THROW(dimension_lower_bound(s, check_dimension_condition(s, 3)), DomainError);
}

TEST(DimensionBound, NonPowerOfTwo) {
  Enclosure e = one_minus_log_r_2(10);
  EXPECT_NEAR(e.midpoint(), 1 - std::log(2.0) / std::log(10.0), 1e-15);
  EXPECT_LE(e.width(), pow_rational(Rational(2), -64));
}
