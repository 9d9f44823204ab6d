#include <algorithm>

#include "gcantor/littlewood.hpp"

namespace gcantor {

namespace {

// Cells are the level-(n+1) children of every level-n child of the
// ancestor J_{n-1}, numbered left to right; cell i belongs to sibling
// i / R_n. Only cells under surviving siblings exist in the construction.
struct CellGrid {
  Rational left;
  Rational width;
  std::uint64_t per_sibling;
  std::uint64_t count;
  std::vector<std::uint64_t> alive_prefix;  // alive siblings before index s
  std::vector<char> alive;

  // Cells meeting the closed interval, clipped to the grid; false if none.
  bool range_of(const ClosedInterval& iv, std::uint64_t& a, std::uint64_t& b) const {
    Integer lo = ceil_rational((iv.left - left) / width) - 1;
    Integer hi = floor_rational((iv.right - left) / width);
    if (lo < 0) lo = 0;
    if (hi >= Integer(static_cast<unsigned long>(count))) {
      hi = Integer(static_cast<unsigned long>(count - 1));
    }
    if (hi < lo) return false;
    a = lo.get_ui();
    b = hi.get_ui();
    return true;
  }

  // Cells in [a, b] lying under surviving siblings.
  std::uint64_t alive_cells(std::uint64_t a, std::uint64_t b) const {
    const std::uint64_t sa = a / per_sibling, sb = b / per_sibling;
    if (sa == sb) return alive[sa] ? b - a + 1 : 0;
    std::uint64_t total = alive[sa] ? (sa + 1) * per_sibling - a : 0;
    total += alive[sb] ? b - sb * per_sibling + 1 : 0;
    total += (alive_prefix[sb] - alive_prefix[sa + 1]) * per_sibling;
    return total;
  }
};

using Range = std::pair<std::uint64_t, std::uint64_t>;

std::vector<Range> merge_ranges(std::vector<Range> rs) {
  std::sort(rs.begin(), rs.end());
  std::vector<Range> out;
  for (const auto& r : rs) {
    if (!out.empty() && r.first <= out.back().second + 1) {
      out.back().second = std::max(out.back().second, r.second);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

std::uint64_t count_alive(const CellGrid& g, const std::vector<Range>& merged) {
  std::uint64_t total = 0;
  for (const auto& [a, b] : merged) total += g.alive_cells(a, b);
  return total;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) throw DomainError("cell grid exceeds 64-bit indexing");
  return a * b;
}

void check_frame(const std::vector<InstanceParams>& xs) {
  for (const auto& x : xs) {
    if (x.R != xs[0].R || x.variant != xs[0].variant || x.c1 != xs[0].c1 ||
        !(x.root == xs[0].root)) {
      throw MismatchedFrame("joint witness instances must share R, variant, c1 and root");
    }
  }
}

}  // namespace

WitnessCertificate witness(const std::vector<InstanceParams>& instances, std::size_t depth,
                           const WitnessOptions& options) {
  if (instances.empty()) throw DomainError("witness needs at least one instance");
  if (depth == 0) throw DomainError("witness depth must be at least 1");
  check_frame(instances);
  const InstanceParams& p0 = instances.front();

  WitnessCertificate cert;
  cert.instances = instances;
  cert.certified = std::all_of(instances.begin(), instances.end(),
                               [](const InstanceParams& p) { return validate_params(p).pass; });
  cert.chain.push_back(p0.root);

  // State: active J_n, its parent J_{n-1}, the survival bitmap of the
  // parent's children and the active one's position among them.
  ClosedInterval ancestor = p0.root;
  std::vector<char> siblings{1};
  std::uint64_t active_pos = 0;

  for (std::size_t n = 0; n < depth; ++n) {
    const ClosedInterval active = cert.chain.back();
    const Integer rn_big = level_R(n, p0.R, p0.variant);
    if (!rn_big.fits_ulong_p()) throw DomainError("R_n does not fit in 64 bits");
    const std::uint64_t rn = rn_big.get_ui();
    const Rational child_len = active.length() / Rational(rn_big);

    CellGrid grid;
    grid.left = ancestor.left;
    grid.width = child_len;
    grid.per_sibling = rn;
    grid.count = checked_mul(siblings.size(), rn);
    grid.alive = siblings;
    grid.alive_prefix.assign(siblings.size() + 1, 0);
    for (std::size_t s = 0; s < siblings.size(); ++s) {
      grid.alive_prefix[s + 1] = grid.alive_prefix[s] + (siblings[s] ? 1 : 0);
    }

    WitnessLedger ledger;
    ledger.level = n;
    ledger.ancestor = ancestor;
    Budget budget(Rational(0));
    for (const auto& inst : instances) {
      budget = budget + littlewood_budget(n, inst.R, inst.variant);
    }
    ledger.budget = budget.is_exact() ? Enclosure::point(budget.exact())
                                      : round_outward(budget.enclose(128), 128);

    std::vector<Range> ranges;
    std::vector<std::pair<Range, RationalCandidate>> hits;  // for NoSurvivor reports
    if (n >= 1) {
      std::map<std::pair<std::size_t, long>, std::vector<Range>> by_stratum;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto cands = enumerate_candidates(n, ancestor, instances[i], options.exec);
        ledger.candidates += cands.size();
        for (const auto& c : cands) {
          std::uint64_t a, b;
          if (!grid.range_of(outer_delta(c), a, b)) continue;
          ranges.push_back({a, b});
          hits.push_back({{a, b}, c});
          if (i == 0) by_stratum[{c.k, c.stratum}].push_back({a, b});
        }
      }
      for (auto& [key, rs] : by_stratum) {
        ledger.kills_by_stratum[key] = count_alive(grid, merge_ranges(std::move(rs)));
      }
    }
    const std::vector<Range> merged = merge_ranges(ranges);
    ledger.removed_in_ancestor = count_alive(grid, merged);

    // Children of the active interval occupy cells [base, base + rn).
    const std::uint64_t base = active_pos * rn;
    std::vector<char> children(rn, 1);
    for (const auto& [a, b] : merged) {
      const std::uint64_t lo = std::max(a, base), hi = std::min(b, base + rn - 1);
      for (std::uint64_t i = lo; i <= hi && lo <= hi; ++i) children[i - base] = 0;
    }
    ledger.removed_in_active =
        static_cast<std::uint64_t>(std::count(children.begin(), children.end(), 0));

    ledger.within_budget = within_budget(ledger.removed_in_ancestor, budget);
    if (!ledger.within_budget && options.budgets == BudgetPolicy::kEnforce) {
      throw BudgetViolation(n, ledger.removed_in_ancestor);
    }

    auto first = std::find(children.begin(), children.end(), 1);
    if (first == children.end()) {
      std::vector<RationalCandidate> offenders;
      for (const auto& [r, c] : hits) {
        if (r.second >= base && r.first < base + rn) offenders.push_back(c);
      }
      throw NoSurvivor(n, std::move(offenders));
    }
    const std::uint64_t pick = static_cast<std::uint64_t>(first - children.begin());
    const Rational left = active.left + child_len * Rational(static_cast<unsigned long>(pick));
    const Rational right = pick + 1 == rn ? active.right : Rational(left + child_len);
    cert.chain.emplace_back(left, right);
    cert.ledgers.push_back(std::move(ledger));

    ancestor = active;
    siblings = std::move(children);
    active_pos = pick;
  }

  Integer rpow;
  mpz_ui_pow_ui(rpow.get_mpz_t(), p0.R, depth - 1);
  cert.height_bound = rpow * big_F(static_cast<long>(depth) - 1, p0.variant);
  return cert;
}

WitnessCertificate witness(const InstanceParams& params, std::size_t depth,
                           const WitnessOptions& options) {
  return witness(std::vector<InstanceParams>{params}, depth, options);
}

}  // namespace gcantor
