#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "gcantor/local_extract.hpp"
#include "gcantor/rules.hpp"
#include "test_support.hpp"

using namespace gcantor;
using namespace gcantor::testing;

namespace {

std::vector<LevelCollection> middle_four(std::size_t depth) {
  return build(constant_schedule(4, 1), middle_rule(1), depth).levels;
}

// Level-n grid index of every interval on the uniform R = 4 grid over [0, 1].
std::set<long> grid_ids(const LevelCollection& c) {
  std::set<long> out;
  Rational scale(1);
  for (std::size_t i = 0; i < c.level; ++i) scale *= 4;
  for (const auto& iv : c.intervals) out.insert(floor_rational(iv.left * scale).get_si());
  return out;
}

}  // namespace

TEST(LocalSchedule, HalvesBranching) {
  CantorSchedule s = local_schedule(explicit_schedule({5, 4, 6}, {{{0, 1}, Rational(1)}}));
  for (std::size_t n = 0; n < 5; ++n) {
    const auto col = s.column(n);
    ASSERT_EQ(col.size(), 1u);
    EXPECT_EQ(col[0].m, n);
    EXPECT_EQ(col[0].value.exact(), Rational(static_cast<unsigned long>(s.branching(n))) / 2);
  }
  EXPECT_EQ(s.column(0)[0].value.exact(), Rational(5, 2));
}

TEST(ExtractLocal, ZeroBudgetKeepsEverything) {
  auto s = constant_schedule(3, 0);
  auto levels = build(s, empty_rule(), 5).levels;
  ExtractOptions opt;
  opt.keep_history = true;
  LocalExtraction x = extract_local(levels, s, opt);
  for (std::size_t n = 0; n <= 5; ++n) {
    for (std::size_t m = 0; m <= n; ++m) {
      EXPECT_EQ(x.l_card[n][m], levels[m].size());
      EXPECT_EQ(x.dump_card[n][m], 0u);
      EXPECT_TRUE(x.dump_history[n][m].empty());
    }
  }
  for (std::size_t m = 0; m <= 5; ++m) {
    EXPECT_EQ(x.levels[m].intervals, levels[m].intervals);
    EXPECT_EQ(x.stabilized_at[m], m);
  }
}

TEST(ExtractLocal, MiddleRemovalDepthSix) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(6);
  DimensionCertificate cert = check_dimension_condition(s, 6);
  ASSERT_TRUE(cert.pass);
  ExtractOptions opt;
  opt.certificate = &cert;
  LocalExtraction x = extract_local(levels, s, opt);
  ConditionReport rep = verify_conditions(levels, x.levels, s);
  EXPECT_TRUE(rep.c1);
  EXPECT_TRUE(rep.c2);
  EXPECT_TRUE(rep.c3);
  EXPECT_TRUE(rep.local_valid);
  for (std::size_t m = 0; m < 6; ++m) {
    for (std::size_t i = 0; i < x.levels[m].size(); ++i) {
      const auto kids = std::count(x.levels[m + 1].parents.begin(), x.levels[m + 1].parents.end(), i);
      EXPECT_GE(kids, 2);
    }
  }
}

TEST(ExtractLocal, OverloadedParentIsDumped) {
  auto s = explicit_schedule({4}, {{{1, 1}, Rational(3)}});
  auto rule = scripted_rule({{1, 0, 1}, {1, 1, 1}, {1, 2, 1}});
  auto levels = build(s, rule, 2).levels;
  ASSERT_EQ(levels[2].size(), 13u);
  ExtractOptions opt;
  opt.keep_history = true;
  LocalExtraction x = extract_local(levels, s, opt);
  EXPECT_EQ(x.dump_card[2][2], 3u);
  EXPECT_EQ(x.dump_card[2][1], 1u);
  EXPECT_EQ(x.dump_card[2][0], 0u);
  EXPECT_EQ(x.source_index[1], (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(x.levels[2].size(), 12u);
  EXPECT_EQ(x.l_history[2][1], (std::vector<std::size_t>{1, 2, 3}));
  ASSERT_EQ(x.dump_history[2][1].size(), 1u);
  EXPECT_EQ(x.dump_history[2][1][0], 0u);  // cell of J_1[0] under the root
  EXPECT_EQ(x.l_card[1][1], 4u);            // before the dump
  EXPECT_EQ(x.stabilized_at[1], 2u);
  EXPECT_TRUE(verify_conditions(levels, x.levels, s).ok());
}

TEST(ExtractLocal, TwoRemovalsStayWithinLocalBudget) {
  auto s = explicit_schedule({4}, {{{1, 1}, Rational(2)}});
  auto levels = build(s, scripted_rule({{1, 0, 1}, {1, 1, 1}}), 2).levels;
  LocalExtraction x = extract_local(levels, s);
  EXPECT_EQ(x.dump_card[2][1], 1u);  // 2 >= s_1 = 2 dumps the parent
  EXPECT_EQ(x.levels[1].size(), 3u);
}

TEST(ExtractLocal, EmptyExtractionAndInvariantViolation) {
  auto s = constant_schedule(4, 3);
  auto levels = build(s, saturating_rule(SaturationOrder::kLeftmost), 3).levels;
  EXPECT_THROW(extract_local(levels, s), EmptyExtraction);
  DimensionCertificate fake;
  fake.pass = true;
  ExtractOptions opt;
  opt.certificate = &fake;
  EXPECT_THROW(extract_local(levels, s, opt), InvariantViolation);
  DimensionCertificate real = check_dimension_condition(s, 3);
  ASSERT_FALSE(real.pass);
  opt.certificate = &real;
  EXPECT_THROW(extract_local(levels, s, opt), EmptyExtraction);
}

TEST(ExtractLocal, NeverEmptyUnderPassingCertificate) {
  std::mt19937_64 rng(7);
  int extracted = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t depth = 2 + rng() % 5;
    std::vector<std::uint64_t> R;
    for (std::size_t i = 0; i < depth; ++i) R.push_back(4 + rng() % 5);
    std::map<std::pair<std::size_t, std::size_t>, Rational> e;
    for (std::size_t n = 0; n < depth; ++n) {
      for (std::size_t m = 0; m <= n; ++m) {
        if (rng() % 2) e[{m, n}] = Rational(static_cast<long>(rng() % 3));
      }
    }
    auto s = explicit_schedule(R, e);
    DimensionCertificate cert = check_dimension_condition(s, depth);
    if (!cert.pass) continue;
    BuildResult b = build(s, saturating_rule(static_cast<SaturationOrder>(rng() % 3), rng()), depth);
    ExtractOptions opt;
    opt.certificate = &cert;
    LocalExtraction x;
    ASSERT_NO_THROW(x = extract_local(b.levels, s, opt));
    ++extracted;
    EXPECT_TRUE(verify_conditions(b.levels, x.levels, s).ok());
    for (std::size_t m = 0; m <= depth; ++m) EXPECT_LE(x.stabilized_at[m], depth);
  }
  EXPECT_GT(extracted, 30);
}

TEST(VerifyConditions, DetectsForeignInterval) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(3);
  LocalExtraction x = extract_local(levels, s);
  auto bad = x.levels;
  bad[2].intervals[0] = ClosedInterval(Rational(1, 16), Rational(2, 16));  // a removed child
  EXPECT_FALSE(verify_conditions(levels, bad, s).c1);
  auto thin = x.levels;
  thin[3].intervals.erase(thin[3].intervals.begin(), thin[3].intervals.begin() + 2);
  thin[3].parents.erase(thin[3].parents.begin(), thin[3].parents.begin() + 2);
  EXPECT_FALSE(verify_conditions(levels, thin, s).c3);
}

TEST(Measure, RootAndAdditivity) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(5);
  LocalExtraction x = extract_local(levels, s);
  MeasureTable mt = build_measure(x.levels);
  EXPECT_EQ(mt.weights[0][0], 1);
  Rational bound(1);
  for (std::size_t n = 1; n < mt.weights.size(); ++n) {
    bound /= Rational(static_cast<unsigned long>(s.branching(n - 1))) / 2;
    std::vector<Rational> sums(mt.weights[n - 1].size(), Rational(0));
    for (std::size_t i = 0; i < mt.weights[n].size(); ++i) {
      EXPECT_GT(mt.weights[n][i], 0);
      EXPECT_LE(mt.weights[n][i], bound);
      sums[x.levels[n].parents[i]] += mt.weights[n][i];
    }
    for (std::size_t p = 0; p < sums.size(); ++p) EXPECT_EQ(sums[p], mt.weights[n - 1][p]);
  }
}

TEST(Measure, TwoChildrenHalve) {
  auto s = constant_schedule(3, 1);
  auto levels = build(s, middle_rule(1), 2).levels;
  MeasureTable mt = build_measure(levels);
  for (const auto& w : mt.weights[2]) EXPECT_EQ(w, Rational(1, 4));
}

TEST(Measure, EmptyLevelThrows) {
  auto levels = middle_four(2);
  levels[2].intervals.clear();
  levels[2].parents.clear();
  EXPECT_THROW(build_measure(levels), EmptyLevelError);
}

TEST(Mdp, MiddleFourHalfDimension) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(6);
  LocalExtraction x = extract_local(levels, s);
  MeasureTable mt = build_measure(x.levels);
  MdpOptions opt;
  opt.random_count = 500;
  MdpReport r = verify_mdp_bound(x.levels, mt, s, Rational(1, 2), opt);
  EXPECT_TRUE(r.hypothesis_ok);
  EXPECT_EQ(r.a_pow_q, 4);
  EXPECT_NEAR(r.a, 2.0, 1e-12);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_ratio_pow_q, r.a_pow_q);
  EXPECT_GT(r.tested, 4000u);
  // The root satisfies the bound trivially: a |I|^s >= 1.
  EXPECT_GE(r.a_pow_q, 1);
}

TEST(Mdp, ConstructionIntervalsWithinConstant) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(5);
  LocalExtraction x = extract_local(levels, s);
  MeasureTable mt = build_measure(x.levels);
  for (std::size_t n = 1; n < x.levels.size(); ++n) {
    for (const auto& w : mt.weights[n]) {
      // (μ / |J_n|^{1/2})^2 <= a^2 = 4.
      EXPECT_LE(w * w / x.levels[n].length, 4);
    }
  }
}

TEST(Mdp, HypothesisFailsForLargeExponent) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(4);
  LocalExtraction x = extract_local(levels, s);
  MeasureTable mt = build_measure(x.levels);
  MdpReport r = verify_mdp_bound(x.levels, mt, s, Rational(3, 4));
  EXPECT_FALSE(r.hypothesis_ok);
  EXPECT_FALSE(r.pass);
}

TEST(Mdp, ConcentratedMassIsCaught) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(4);
  LocalExtraction x = extract_local(levels, s);
  MeasureTable mt = build_measure(x.levels);
  auto& last = mt.weights.back();
  std::fill(last.begin(), last.end(), Rational(0));
  last[0] = 1;
  MdpReport r = verify_mdp_bound(x.levels, mt, s, Rational(1, 2));
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.violations.empty());
  EXPECT_GT(r.max_ratio_pow_q, r.a_pow_q);
}

TEST(Mdp, SerialAndParallelAgree) {
  auto s = constant_schedule(4, 1);
  auto levels = middle_four(5);
  LocalExtraction x = extract_local(levels, s);
  MeasureTable mt = build_measure(x.levels);
  MdpOptions a, b;
  b.exec = ExecPolicy::kParallel;
  MdpReport ra = verify_mdp_bound(x.levels, mt, s, Rational(1, 2), a);
  MdpReport rb = verify_mdp_bound(x.levels, mt, s, Rational(1, 2), b);
  EXPECT_EQ(ra.max_ratio_pow_q, rb.max_ratio_pow_q);
  EXPECT_EQ(ra.tested, rb.tested);
}

TEST(WindowSums, MatchBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::uint64_t> m(1 + rng() % 200);
    for (auto& v : m) v = rng() % 5 == 0 ? 0 : rng() % 1000;
    const std::size_t max_len = m.size();
    auto serial = max_window_sums(m, max_len, ExecPolicy::kSerial);
    auto parallel = max_window_sums(m, max_len, ExecPolicy::kParallel);
    ASSERT_EQ(serial, parallel);
    ASSERT_EQ(serial.size(), max_len + 1);
    EXPECT_EQ(serial[0], 0u);
    for (std::size_t len = 1; len <= max_len; ++len) {
      std::uint64_t best = 0;
      for (std::size_t i = 0; i + len <= m.size(); ++i) {
        std::uint64_t sum = 0;
        for (std::size_t c = i; c < i + len; ++c) sum += m[c];
        best = std::max(best, sum);
      }
      EXPECT_EQ(serial[len], best);
    }
  }
}

TEST(Distribution, ZeroRemovalFamily) {
  auto s = constant_schedule(4, 1);
  auto j = middle_four(5);
  auto t = build(s, empty_rule(), 5).levels;
  DistributionReport r = check_distribution(j, t, s);
  for (std::size_t n = 0; n <= 5; ++n) EXPECT_EQ(r.h[n], j[n].size());
  EXPECT_TRUE(r.nonempty);
  EXPECT_TRUE(r.growth);
}

TEST(Distribution, AdversaryOnPassingScheduleDepthSix) {
  auto s = constant_schedule(4, 1);
  auto j = middle_four(6);
  const std::uint64_t worst = adversarial_min_hits(j, s, 6);
  EXPECT_GE(worst, 1u);
  auto t = adversarial_t(j, s, 6);
  ASSERT_EQ(t.size(), 7u);
  EXPECT_TRUE(structurally_valid(local_schedule(s), t));
  DistributionReport r = check_distribution(j, t, s);
  EXPECT_TRUE(r.nonempty);
  EXPECT_EQ(r.h[6], worst);
}

// Every (I, R, R - s) family on the R = 4 grid to depth 3, enumerated.
TEST(Distribution, AdversaryMatchesExhaustiveSearch) {
  std::mt19937_64 rng(11);
  const std::vector<std::vector<int>> pairs{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int trial = 0; trial < 4; ++trial) {
    const Rational r(static_cast<long>(trial % 2 == 0 ? 1 : 2));
    auto s = constant_schedule(4, r);
    auto j = build(s, saturating_rule(SaturationOrder::kRandom, rng()), 3).levels;
    std::vector<std::set<long>> jid;
    for (const auto& l : j) jid.push_back(grid_ids(l));
    for (std::size_t target = 1; target <= 3; ++target) {
      std::uint64_t best = UINT64_MAX;
      std::function<void(std::size_t, const std::vector<long>&)> walk =
          [&](std::size_t level, const std::vector<long>& tl) {
            if (level == target) {
              std::uint64_t h = 0;
              for (long id : tl) h += jid[level].count(id);
              best = std::min(best, h);
              return;
            }
            std::vector<long> next;
            std::function<void(std::size_t)> choose = [&](std::size_t i) {
              if (i == tl.size()) {
                walk(level + 1, next);
                return;
              }
              for (const auto& p : pairs) {
                next.push_back(4 * tl[i] + p[0]);
                next.push_back(4 * tl[i] + p[1]);
                choose(i + 1);
                next.pop_back();
                next.pop_back();
              }
            };
            choose(0);
          };
      walk(0, {0});
      EXPECT_EQ(adversarial_min_hits(j, s, target), best) << "trial " << trial << " target " << target;
      auto t = adversarial_t(j, s, target);
      EXPECT_EQ(check_distribution(j, t, s).h[target], best);
    }
  }
}

TEST(Distribution, OversizedBudgetsAdmitMissingFamily) {
  auto s = constant_schedule(4, 3);
  ASSERT_FALSE(check_dimension_condition(s, 3).pass);
  auto j = build(s, saturating_rule(SaturationOrder::kLeftmost), 3).levels;
  EXPECT_EQ(adversarial_min_hits(j, s, 1), 0u);
  DistributionReport r = check_distribution(j, adversarial_t(j, s, 1), s);
  EXPECT_FALSE(r.nonempty);
  ASSERT_TRUE(r.first_empty.has_value());
  EXPECT_EQ(*r.first_empty, 1u);
}
