// Verification deliberately shares no loops with the builder: verify_witness
// scans q directly, and sieve_soundness enumerates qbar in the outer loop.

#include <omp.h>

#include <algorithm>

#include "gcantor/littlewood.hpp"

namespace gcantor {

namespace {

struct QResult {
  bool skipped = false;
  std::optional<Violation> violation;
};

// f(q) q |q|_D ||qα|| > c for every α in J.
QResult check_q(std::uint64_t qv, const ClosedInterval& J, const InstanceParams& p,
                const Integer& bound, std::size_t instance, std::size_t level) {
  QResult out;
  const Integer q(static_cast<unsigned long>(qv));
  const std::size_t k = valuation_index(q, p.d);
  const Integer Dk = p.d.D(k);
  const Integer h = q * (q / Dk);
  if (h >= bound) {
    out.skipped = true;
    return out;
  }
  const Rational qr(q);
  const Rational a = qr * J.left, b = qr * J.right;
  const Integer fa = floor_rational(a), cb = ceil_rational(b);
  Rational dist;
  Integer nearest;
  if (floor_rational(b) >= ceil_rational(a)) {
    dist = 0;  // qJ contains an integer
    nearest = ceil_rational(a);
  } else {
    const Rational da = a - Rational(fa), db = Rational(cb) - b;
    dist = std::min(da, db);
    nearest = da <= db ? fa : cb;
  }
  // q |q|_D = q / D_k; f >= 1 settles almost every q without logarithms.
  const Rational scale = make_rational(q, Dk) * dist;
  bool ok = scale > p.c;
  if (!ok && dist > 0) {
    ok = compare_refined(
             [&](int bits) { return f_at(q, p.variant, bits) * Enclosure::point(scale); },
             p.c) > 0;
  }
  if (!ok) out.violation = Violation{instance, nearest, q, level};
  return out;
}

void sort_violations(std::vector<Violation>& v) {
  std::sort(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
    if (a.instance != b.instance) return a.instance < b.instance;
    if (a.level != b.level) return a.level < b.level;
    if (a.q != b.q) return a.q < b.q;
    return a.r < b.r;
  });
}

}  // namespace

VerifyReport verify_witness(const WitnessCertificate& cert, std::uint64_t q_max,
                            ExecPolicy policy) {
  VerifyReport report;
  if (cert.chain.empty()) return report;
  const ClosedInterval& J = cert.chain.back();
  const std::size_t level = cert.depth();

  for (std::size_t i = 0; i < cert.instances.size(); ++i) {
    const InstanceParams& p = cert.instances[i];
    if (policy == ExecPolicy::kSerial) {
      for (std::uint64_t q = 1; q <= q_max; ++q) {
        QResult r = check_q(q, J, p, cert.height_bound, i, level);
        if (r.skipped) {
          ++report.skipped;
          continue;
        }
        ++report.checked;
        if (r.violation) report.violations.push_back(*r.violation);
      }
    } else {
      std::uint64_t checked = 0, skipped = 0;
      std::vector<Violation> found;
      const long qm = static_cast<long>(q_max);
#pragma omp parallel
      {
        std::vector<Violation> local;
        std::uint64_t lc = 0, ls = 0;
#pragma omp for schedule(dynamic, 4096) nowait
        for (long q = 1; q <= qm; ++q) {
          QResult r = check_q(static_cast<std::uint64_t>(q), J, p, cert.height_bound, i, level);
          if (r.skipped) {
            ++ls;
            continue;
          }
          ++lc;
          if (r.violation) local.push_back(*r.violation);
        }
#pragma omp critical
        {
          checked += lc;
          skipped += ls;
          found.insert(found.end(), local.begin(), local.end());
        }
      }
      report.checked += checked;
      report.skipped += skipped;
      report.violations.insert(report.violations.end(), found.begin(), found.end());
    }
  }
  sort_violations(report.violations);
  return report;
}

namespace {

// Every r/q with q = D_k qbar, d_{k+1} not dividing qbar and D_k qbar^2 < bound,
// checked against the inner exclusion interval.
void sieve_qbar(std::uint64_t qb, const ClosedInterval& J, const InstanceParams& p,
                const Integer& bound, std::size_t instance, std::size_t level,
                std::uint64_t& checked, std::vector<Violation>& out) {
  const Integer qbar(static_cast<unsigned long>(qb));
  const Integer qbar_sq = qbar * qbar;
  for (std::size_t k = 0;; ++k) {
    const Integer Dk = p.d.D(k);
    const Integer h = Dk * qbar_sq;
    if (h >= bound) break;
    if (mpz_divisible_p(qbar.get_mpz_t(), p.d.d(k + 1).get_mpz_t())) continue;
    const Integer q = Dk * qbar;
    const Rational qr(q);
    const Rational slack = p.c / Rational(qbar);  // q * c/H with f >= 1
    const Integer rlo = ceil_rational(qr * J.left - slack);
    const Integer rhi = floor_rational(qr * J.right + slack);
    for (Integer r = rlo; r <= rhi; ++r) {
      ++checked;
      const Rational rho = delta_radius(q, h, p, Rounding::kInner);
      const Rational center = make_rational(r, q);
      if (center - rho <= J.right && center + rho >= J.left) {
        out.push_back(Violation{instance, r, q, level});
      }
    }
  }
}

}  // namespace

VerifyReport sieve_soundness(const WitnessCertificate& cert, ExecPolicy policy) {
  VerifyReport report;
  if (cert.instances.empty()) return report;
  const InstanceParams& p0 = cert.instances.front();
  for (std::size_t n = 1; n < cert.chain.size(); ++n) {
    // J_n must avoid every r/q with H(q) < R^{n-1} F(n-1).
    Integer bound;
    mpz_ui_pow_ui(bound.get_mpz_t(), p0.R, n - 1);
    bound *= big_F(static_cast<long>(n) - 1, p0.variant);
    Integer qmax_big;
    mpz_sqrt(qmax_big.get_mpz_t(), bound.get_mpz_t());
    const std::uint64_t qmax = qmax_big.get_ui() + 1;  // D_0 qbar^2 < bound
    const ClosedInterval& J = cert.chain[n];

    for (std::size_t i = 0; i < cert.instances.size(); ++i) {
      const InstanceParams& p = cert.instances[i];
      if (policy == ExecPolicy::kSerial) {
        for (std::uint64_t qb = 1; qb <= qmax; ++qb) {
          sieve_qbar(qb, J, p, bound, i, n, report.checked, report.violations);
        }
      } else {
        std::uint64_t checked = 0;
        std::vector<Violation> found;
        const long qm = static_cast<long>(qmax);
#pragma omp parallel
        {
          std::vector<Violation> local;
          std::uint64_t lc = 0;
#pragma omp for schedule(dynamic, 4096) nowait
          for (long qb = 1; qb <= qm; ++qb) {
            sieve_qbar(static_cast<std::uint64_t>(qb), J, p, bound, i, n, lc, local);
          }
#pragma omp critical
          {
            checked += lc;
            found.insert(found.end(), local.begin(), local.end());
          }
        }
        report.checked += checked;
        report.violations.insert(report.violations.end(), found.begin(), found.end());
      }
    }
  }
  sort_violations(report.violations);
  return report;
}

}  // namespace gcantor
