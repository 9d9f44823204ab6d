#include <omp.h>

#include <algorithm>
#include <optional>

#include "gcantor/littlewood.hpp"

namespace gcantor {

namespace {

struct Scan {
  const InstanceParams& p;
  const ClosedInterval& window;
  Integer lower;  // R^{n-1} F(n-1)
  Integer upper;  // R^n F(n)
};

struct Block {
  std::size_t k;
  std::uint64_t lo, hi;  // inclusive qbar range
};

long stratum_of(const Integer& h, const Integer& lower) {
  const Rational ratio = make_rational(h, lower);
  return floor_of_enclosure([&](int bits) { return ln_at(ratio, bits); }).get_si();
}

// Candidates r/q with q = D_k qbar; the prefilter uses qρ <= c/qbar (f >= 1)
// and the outer radius then decides exactly.
void scan_block(const Scan& s, const Block& b, const Integer& Dk, const Integer& dnext,
                std::vector<RationalCandidate>& out) {
  const bool small_d = dnext.fits_ulong_p();
  const unsigned long dn = small_d ? dnext.get_ui() : 0;
  for (std::uint64_t qb = b.lo; qb <= b.hi; ++qb) {
    if (small_d && qb % dn == 0) continue;
    const Integer qbar(static_cast<unsigned long>(qb));
    const Integer q = Dk * qbar;
    const Rational slack = s.p.c / Rational(qbar);
    const Rational qr(q);
    const Integer rlo = ceil_rational(qr * s.window.left - slack);
    const Integer rhi = floor_rational(qr * s.window.right + slack);
    if (rhi < rlo) continue;
    const Integer h = Dk * qbar * qbar;
    const Rational rho = delta_radius(q, h, s.p, Rounding::kOuter);
    std::optional<long> stratum;  // shared by every r for this q
    for (Integer r = rlo; r <= rhi; ++r) {
      const Rational center = make_rational(r, q);
      if (center - rho > s.window.right || center + rho < s.window.left) continue;
      RationalCandidate c;
      c.r = r;
      c.q = q;
      c.k = b.k;
      c.qbar = qbar;
      c.height = h;
      if (!stratum) stratum = stratum_of(h, s.lower);
      c.stratum = *stratum;
      c.outer_radius = rho;
      out.push_back(std::move(c));
    }
  }
}

}  // namespace

std::vector<RationalCandidate> enumerate_candidates(std::size_t n, const ClosedInterval& window,
                                                    const InstanceParams& p, ExecPolicy policy) {
  auto [lower, upper] = height_window(n, p);
  Scan s{p, window, lower, upper};

  // D_k <= H < upper bounds the k range; for each k the qbar range solves
  // lower <= D_k qbar^2 < upper.
  std::vector<Block> blocks;
  std::vector<Integer> Dks, dnexts;
  constexpr std::uint64_t kBlock = 4096;
  for (std::size_t k = 0;; ++k) {
    const Integer Dk = p.d.D(k);
    if (Dk >= upper) break;
    Integer lo_sq = (lower + Dk - 1) / Dk;  // ceil(lower / D_k)
    Integer qlo;
    mpz_sqrt(qlo.get_mpz_t(), lo_sq.get_mpz_t());
    if (qlo * qlo < lo_sq) ++qlo;
    if (qlo < 1) qlo = 1;
    Integer hi_sq = (upper + Dk - 1) / Dk - 1;  // qbar^2 < upper / D_k
    Integer qhi;
    mpz_sqrt(qhi.get_mpz_t(), hi_sq.get_mpz_t());
    Dks.push_back(Dk);
    dnexts.push_back(p.d.d(k + 1));
    if (qhi < qlo) continue;
    if (!qhi.fits_ulong_p()) throw DomainError("height window too large to enumerate");
    for (std::uint64_t a = qlo.get_ui(), b = qhi.get_ui(); a <= b;) {
      const std::uint64_t end = std::min<std::uint64_t>(b, a + kBlock - 1);
      blocks.push_back({k, a, end});
      if (end == b) break;
      a = end + 1;
    }
  }

  std::vector<RationalCandidate> out;
  if (policy == ExecPolicy::kSerial) {
    for (const auto& b : blocks) scan_block(s, b, Dks[b.k], dnexts[b.k], out);
  } else {
    const long nb = static_cast<long>(blocks.size());
    std::vector<std::vector<RationalCandidate>> parts(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < nb; ++i) {
      const auto& b = blocks[static_cast<std::size_t>(i)];
      scan_block(s, b, Dks[b.k], dnexts[b.k], parts[static_cast<std::size_t>(i)]);
    }
    for (auto& part : parts) {
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RationalCandidate> enumerate_candidates_bruteforce(std::size_t n,
                                                               const ClosedInterval& window,
                                                               const InstanceParams& p) {
  auto [lower, upper] = height_window(n, p);
  std::vector<RationalCandidate> out;
  // H(q) >= q because D_k | q, so q < upper covers every height below it.
  for (Integer q = 1; q < upper; ++q) {
    const Integer h = height(q, p.d);
    if (h < lower || h >= upper) continue;
    const Rational rho = delta_radius(q, h, p, Rounding::kOuter);
    const Rational qr(q);
    const Integer rlo = ceil_rational(qr * (window.left - rho));
    const Integer rhi = floor_rational(qr * (window.right + rho));
    for (Integer r = rlo; r <= rhi; ++r) {
      RationalCandidate c;
      c.r = r;
      c.q = q;
      c.k = valuation_index(q, p.d);
      c.qbar = q / p.d.D(c.k);
      c.height = h;
      c.outer_radius = rho;
      c.stratum = floor_of_enclosure([&](int bits) {
                    return ln_at(make_rational(h, lower), bits);
                  }).get_si();
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gcantor
