// Acceptance run: one PASS/FAIL line per criterion, with timings and the
// numbers behind each verdict. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gcantor/certify.hpp"
#include "gcantor/littlewood.hpp"
#include "gcantor/local_extract.hpp"
#include "gcantor/rules.hpp"

using namespace gcantor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("[%s] criterion %d: %s (%.2f s, limit %.0f s%s) -- %s\n", ok ? "PASS" : "FAIL", id,
              title.c_str(), secs, budget_s, in_time ? "" : ", over time", o.detail.c_str());
  std::fflush(stdout);
}

Rational two_pow(long e) { return pow_rational(Rational(2), e); }

ClosedInterval unit() { return ClosedInterval(Rational(0), Rational(1)); }

CantorSchedule constant_schedule(std::uint64_t r, const Rational& diag) {
  CantorSchedule::Explicit d;
  d.branching = {r};
  if (diag != 0) d.diagonals.push_back({0, diag});
  return CantorSchedule::from_explicit(unit(), d);
}

CantorSchedule random_schedule(std::mt19937_64& rng, std::size_t depth, std::uint64_t r_lo,
                               std::uint64_t r_hi, long max_budget) {
  CantorSchedule::Explicit d;
  for (std::size_t i = 0; i < depth; ++i) d.branching.push_back(r_lo + rng() % (r_hi - r_lo + 1));
  for (std::size_t n = 0; n < depth; ++n) {
    for (std::size_t m = 0; m <= n; ++m) {
      if (rng() % 2) d.entries[{m, n}] = Rational(static_cast<long>(rng() % (max_budget + 1)));
    }
  }
  return CantorSchedule::from_explicit(unit(), d);
}

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

// Shared body of criteria 6, 7 and 9.
Outcome witness_checks(const std::vector<InstanceParams>& instances, std::size_t depth,
                       std::uint64_t q_max) {
  Outcome o;
  std::ostringstream d;
  bool ok = true;
  for (const auto& p : instances) ok = ok && validate_params(p).pass;
  WitnessCertificate w = witness(instances, depth);
  ok = ok && w.certified;
  const InstanceParams& p0 = instances.front();
  for (std::size_t n = 0; n <= depth; ++n) {
    const Rational want = p0.c1 / pow_rational(Rational(static_cast<unsigned long>(p0.R)), static_cast<long>(n)) /
                          Rational(big_F(static_cast<long>(n), p0.variant));
    ok = ok && w.chain[n].length() == want;
    if (n > 0) ok = ok && w.chain[n - 1].contains(w.chain[n]);
  }
  std::uint64_t max_removed = 0, candidates = 0;
  for (const auto& l : w.ledgers) {
    ok = ok && l.within_budget;
    max_removed = std::max(max_removed, l.removed_in_ancestor);
    candidates += l.candidates;
  }
  d << "root [" << w.chain[0].left.get_d() << ", ...], candidates " << candidates
    << ", max removals per ancestor " << max_removed << " (last budget "
    << fmt(w.ledgers.back().budget.hi.get_d()) << "), height bound " << w.height_bound.get_str();
  Integer qbar_max;
  mpz_sqrt(qbar_max.get_mpz_t(), w.height_bound.get_mpz_t());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    WitnessCertificate single = w;
    single.instances = {instances[i]};
    VerifyReport v = verify_witness(single, q_max, ExecPolicy::kParallel);
    VerifyReport s = sieve_soundness(single, ExecPolicy::kParallel);
    ok = ok && v.ok() && s.ok();
    d << "; instance " << i << " (" << instances[i].d.describe() << "): verify checked "
      << v.checked << " q, " << v.violations.size() << " violations; sieve scanned qbar <= "
      << qbar_max.get_str() << ", " << s.checked << " r/q within reach of the chain, "
      << s.violations.size() << " intersections";
  }
  o.pass = ok;
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  run(1, "middle-third reproduction", 1, [] {
    auto s = constant_schedule(3, Rational(1));
    BuildResult b = build(s, middle_rule(1), 12);
    bool ok = !b.empty_level.has_value();
    for (std::size_t n = 0; n <= 12; ++n) ok = ok && b.levels[n].size() == (std::size_t{1} << n);
    NonEmptinessCertificate c = certify_nonempty(s, 12);
    for (const auto& t : c.t_values) ok = ok && t.is_point() && t.lo == 2;
    ok = ok && c.pass;
    return Outcome{ok, "#J_12 = " + std::to_string(b.levels[12].size()) + ", t_n = 2 for n <= 12, certificate " +
                           (c.pass ? "passes" : "fails")};
  });

  run(2, "non-emptiness certificate vs adversarial builds", 60, [] {
    std::mt19937_64 rng(20240601);
    std::size_t schedules = 0, passing = 0, failing = 0, witnessed = 0, builds = 0;
    bool ok = true;
    while (schedules < 240) {
      const std::size_t depth = 1 + rng() % 6;
      CantorSchedule s = random_schedule(rng, depth, 2, 6, 3);
      ++schedules;
      NonEmptinessCertificate cert = certify_nonempty(s, depth);
      bool emptied = false;
      for (int order = 0; order < 3; ++order) {
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
          BuildResult b = build(s, saturating_rule(static_cast<SaturationOrder>(order), seed), depth);
          ++builds;
          if (b.empty_level) emptied = true;
          if (!cert.pass) continue;
          if (b.empty_level) {
            ok = false;
            continue;
          }
          for (std::size_t n = 0; n <= depth; ++n) {
            const Integer lower = ceil_rational(cert.survivor_lower_bounds[n]);
            ok = ok && Integer(static_cast<unsigned long>(b.levels[n].size())) >= lower;
          }
        }
      }
      if (cert.pass) {
        ++passing;
      } else {
        ++failing;
        if (emptied) ++witnessed;
      }
    }
    std::ostringstream d;
    d << schedules << " schedules, " << builds << " builds; " << passing
      << " passing certificates all respected; " << witnessed << "/" << failing
      << " failing certificates witnessed by an empty level ("
      << fmt(failing ? 100.0 * static_cast<double>(witnessed) / static_cast<double>(failing) : 0, 3)
      << "%, reported only)";
    return Outcome{ok && passing >= 50, d.str()};
  });

  run(3, "dimension pipeline on R_n = 4, r_{n,n} = 1", 120, [] {
    auto s = constant_schedule(4, Rational(1));
    DimensionCertificate dc = check_dimension_condition(s, 8);
    bool ok = dc.pass;
    for (const auto& row : dc.rows) ok = ok && row.lhs.is_point() && row.lhs.lo == 1 && row.rhs == 1;
    BuildResult b = build(s, middle_rule(1), 8);
    ExtractOptions xo;
    xo.certificate = &dc;
    LocalExtraction x = extract_local(b.levels, s, xo);
    ConditionReport cr = verify_conditions(b.levels, x.levels, s);
    ok = ok && cr.ok();
    MeasureTable m = build_measure(x.levels);
    MdpOptions mo;
    mo.exec = ExecPolicy::kParallel;
    MdpReport r = verify_mdp_bound(x.levels, m, s, Rational(1, 2), mo);
    ok = ok && r.pass && r.hypothesis_ok && r.a_pow_q == 4;
    std::ostringstream d;
    d << "dimension condition lhs = rhs = 1 at every n <= 8; C1-C3 and local validity "
      << (cr.ok() ? "hold" : "fail") << "; #L_8 = " << x.levels[8].size() << "; a = " << r.a
      << "; " << r.tested << " intervals B tested; max mu(B)/|B|^(1/2) = " << fmt(r.max_ratio)
      << "; violations " << r.violations.size();
    return Outcome{ok, d.str()};
  });

  run(4, "extraction never empty when the dimension condition passes", 120, [] {
    std::mt19937_64 rng(77);
    std::size_t runs = 0, tried = 0;
    bool ok = true;
    while (runs < 120) {
      const std::size_t depth = 2 + rng() % 6;
      CantorSchedule s = random_schedule(rng, depth, 4, 8, 3);
      ++tried;
      // Keep builds to a desk-scale node count.
      double nodes = 1;
      for (std::size_t n = 0; n < depth; ++n) nodes *= static_cast<double>(s.branching(n));
      if (nodes > 4e5) continue;
      DimensionCertificate dc = check_dimension_condition(s, depth);
      if (!dc.pass) continue;
      BuildResult b = build(s, saturating_rule(static_cast<SaturationOrder>(rng() % 3), rng()), depth);
      ExtractOptions xo;
      xo.certificate = &dc;
      try {
        LocalExtraction x = extract_local(b.levels, s, xo);
        ok = ok && verify_conditions(b.levels, x.levels, s).ok();
      } catch (const EmptyExtraction&) {
        ok = false;
      } catch (const InvariantViolation&) {
        ok = false;
      }
      ++runs;
    }
    return Outcome{ok, std::to_string(runs) + " extractions (" + std::to_string(tried) +
                           " schedules drawn), none empty, C1-C3 verified on each"};
  });

  run(5, "Littlewood constants", 1, [] {
    ParamsCertificate c = validate_params(1u << 18, two_pow(-27), two_pow(-80), Variant::kProp1);
    std::ostringstream d;
    for (const auto& chk : c.checks) {
      d << chk.name << ": lhs in [" << fmt(chk.lhs.lo.get_d(), 8) << ", " << fmt(chk.lhs.hi.get_d(), 8)
        << "] vs " << fmt(chk.bound.get_d(), 8) << (chk.pass ? " ok" : " FAIL") << "; ";
    }
    return Outcome{c.pass, d.str()};
  });

  run(6, "prop1 witness, D const 2, R = 2^18, depth 3", 600, [] {
    auto p = InstanceParams::make(1u << 18, two_pow(-27), two_pow(-80), Variant::kProp1,
                                  DSequence::constant(2));
    Outcome a = witness_checks({p}, 3, 1000000);
    const Rational third(1, 3);
    auto q = InstanceParams::make(1u << 18, two_pow(-27), two_pow(-80), Variant::kProp1,
                                  DSequence::constant(2), ClosedInterval(third, third + two_pow(-27)));
    Outcome b = witness_checks({q}, 3, 1000000);
    return Outcome{a.pass && b.pass, a.detail + " || " + b.detail};
  });

  run(7, "prop2 witness, doubling D, R = 2^18, depth 3", 600, [] {
    auto p = InstanceParams::make(1u << 18, two_pow(-27), two_pow(-80), Variant::kProp2,
                                  DSequence::doubling());
    return witness_checks({p}, 3, 1000000);
  });

  run(8, "enumeration completeness at R = 16", 30, [] {
    bool ok = true;
    std::ostringstream d;
    for (std::uint64_t dv : {2u, 3u}) {
      auto p = InstanceParams::make(16, Rational(1, 8), two_pow(-16), Variant::kProp1,
                                    DSequence::constant(dv));
      ok = ok && !validate_params(p).pass;  // experimental mode
      for (std::size_t n = 1; n <= 2; ++n) {
        auto fast = enumerate_candidates(n, p.root, p);
        auto slow = enumerate_candidates_bruteforce(n, p.root, p);
        const bool same = fast.size() == slow.size() && std::equal(fast.begin(), fast.end(), slow.begin());
        ok = ok && same;
        d << "D const " << dv << ", n = " << n << ": " << fast.size() << " candidates "
          << (same ? "match" : "DIFFER") << "; ";
      }
    }
    return Outcome{ok, d.str()};
  });

  run(9, "composition of two Littlewood schedules, R = 2^20", 900, [] {
    auto a = InstanceParams::make(1u << 20, two_pow(-30), two_pow(-90), Variant::kProp1,
                                  DSequence::constant(2));
    auto b = InstanceParams::make(1u << 20, two_pow(-30), two_pow(-90), Variant::kProp1,
                                  DSequence::constant(3));
    std::vector<CantorSchedule> parts{littlewood_schedule(a), littlewood_schedule(b)};
    CantorSchedule joint = intersect_schedules(parts);
    DimensionCertificate dc = check_dimension_condition(joint, 1000);
    Outcome w = witness_checks({a, b}, 2, 1000000);
    return Outcome{dc.pass && w.pass, std::string("dimension condition on the summed schedule ") +
                                          (dc.pass ? "passes" : "fails") + " for n <= 1000; " + w.detail};
  });

  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
