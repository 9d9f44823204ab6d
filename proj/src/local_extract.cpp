#include "gcantor/local_extract.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace gcantor {

EmptyExtraction::EmptyExtraction(std::size_t m_, std::size_t n_)
    : std::runtime_error("extraction emptied L_{" + std::to_string(m_) + "," +
                         std::to_string(n_) + "}"),
      m(m_),
      n(n_) {}

EmptyLevelError::EmptyLevelError(std::size_t l)
    : std::runtime_error("level " + std::to_string(l) + " is empty"), level(l) {}

CantorSchedule local_schedule(const CantorSchedule& base) {
  auto branching = [base](std::size_t n) { return base.branching(n); };
  auto column = [base](std::size_t n) {
    return std::vector<BudgetEntry>{
        {n, Budget(Rational(static_cast<unsigned long>(base.branching(n))) / 2)}};
  };
  return CantorSchedule::generated(base.root(), branching, column,
                                   base.branching_nondecreasing_from(0),
                                   "local(" + base.label() + ")");
}

namespace {

// Child ranges: survivors at level m + 1 with parent p are
// [begin[p], begin[p + 1]) because levels are sorted.
std::vector<std::size_t> child_offsets(const LevelCollection& parent_level,
                                       const LevelCollection& child_level) {
  std::vector<std::size_t> begin(parent_level.size() + 1, 0);
  for (std::size_t p : child_level.parents) ++begin[p + 1];
  for (std::size_t p = 0; p < parent_level.size(); ++p) begin[p + 1] += begin[p];
  return begin;
}

std::uint64_t slot_of(const LevelCollection& parent_level, const LevelCollection& level,
                      std::size_t i) {
  const Rational offset = level.intervals[i].left - parent_level.intervals[level.parents[i]].left;
  return floor_rational(offset / level.length).get_ui();
}

}  // namespace

LocalExtraction extract_local(std::span<const LevelCollection> levels,
                              const CantorSchedule& schedule, const ExtractOptions& options) {
  if (levels.empty() || levels[0].size() != 1) throw DomainError("extraction needs J_0 = {I}");
  const std::size_t N = levels.size() - 1;

  std::vector<std::vector<std::size_t>> begin(N);  // begin[m]: children of J_m
  std::vector<std::vector<std::uint64_t>> cell(N + 1);
  cell[0] = {0};
  for (std::size_t m = 0; m < N; ++m) begin[m] = child_offsets(levels[m], levels[m + 1]);
  for (std::size_t m = 1; m <= N; ++m) {
    const std::uint64_t rm = schedule.branching(m - 1);
    cell[m].resize(levels[m].size());
    for (std::size_t i = 0; i < levels[m].size(); ++i) {
      cell[m][i] = levels[m].parents[i] * rm + slot_of(levels[m - 1], levels[m], i);
    }
  }

  std::vector<std::vector<char>> in_l(N + 1), dumped(N + 1);
  std::vector<std::vector<std::uint64_t>> dump_count(N + 1);  // [m][parent at m-1]
  std::vector<std::uint64_t> removed_cells(N + 1, 0);
  std::vector<std::vector<std::uint64_t>> removed_ids(N + 1);  // history only
  in_l[0] = {1};
  dumped[0] = {0};

  LocalExtraction out;
  auto count = [](const std::vector<char>& v) {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
  };
  auto record = [&](std::size_t t) {
    std::vector<std::size_t> lc, dc;
    for (std::size_t m = 0; m <= t; ++m) {
      lc.push_back(count(in_l[m]));
      dc.push_back(count(dumped[m]) + removed_cells[m]);
    }
    out.l_card.push_back(std::move(lc));
    out.dump_card.push_back(std::move(dc));
    if (!options.keep_history) return;
    std::vector<std::vector<std::size_t>> lh;
    std::vector<std::vector<std::uint64_t>> dh;
    for (std::size_t m = 0; m <= t; ++m) {
      std::vector<std::size_t> members;
      std::vector<std::uint64_t> cells = removed_ids[m];
      for (std::size_t i = 0; i < in_l[m].size(); ++i) {
        if (in_l[m][i]) members.push_back(i);
        if (dumped[m][i]) cells.push_back(cell[m][i]);
      }
      std::sort(cells.begin(), cells.end());
      lh.push_back(std::move(members));
      dh.push_back(std::move(cells));
    }
    out.l_history.push_back(std::move(lh));
    out.dump_history.push_back(std::move(dh));
  };
  auto fail_empty = [&](std::size_t m, std::size_t t) {
    if (options.certificate && options.certificate->pass) {
      throw InvariantViolation("L_{" + std::to_string(m) + "," + std::to_string(t) +
                               "} is empty although the dimension condition holds");
    }
    throw EmptyExtraction(m, t);
  };

  std::vector<std::size_t> stable(N + 1, 0);
  record(0);

  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t next = n + 1;
    const std::uint64_t rn = schedule.branching(n);

    // New level: L'_{n+1,n+1} and R_{n+1,n+1}.
    in_l[next].assign(levels[next].size(), 0);
    dumped[next].assign(levels[next].size(), 0);
    dump_count[next].assign(levels[n].size(), 0);
    for (std::size_t i = 0; i < levels[next].size(); ++i) {
      in_l[next][i] = in_l[n][levels[next].parents[i]];
    }
    for (std::size_t p = 0; p < levels[n].size(); ++p) {
      if (!in_l[n][p]) continue;
      const std::uint64_t kids = begin[n][p + 1] - begin[n][p];
      dump_count[next][p] += rn - kids;
      removed_cells[next] += rn - kids;
      if (options.keep_history) {
        std::vector<char> present(rn, 0);
        for (std::size_t c = begin[n][p]; c < begin[n][p + 1]; ++c) present[cell[next][c] % rn] = 1;
        for (std::uint64_t j = 0; j < rn; ++j) {
          if (!present[j]) removed_ids[next].push_back(p * rn + j);
        }
      }
    }

    // Dumping pass, descending u: dump J_u holding >= s_u dumped children.
    for (std::size_t u = next; u-- > 0;) {
      const std::uint64_t ru = schedule.branching(u);
      for (std::size_t i = 0; i < levels[u].size(); ++i) {
        if (!in_l[u][i] || 2 * dump_count[u + 1][i] < ru) continue;
        in_l[u][i] = 0;
        dumped[u][i] = 1;
        if (u >= 1) ++dump_count[u][levels[u].parents[i]];
      }
    }

    // Re-nesting pass, ascending u: drop intervals whose parent left L.
    for (std::size_t u = 1; u <= next; ++u) {
      for (std::size_t i = 0; i < levels[u].size(); ++i) {
        if (in_l[u][i] && !in_l[u - 1][levels[u].parents[i]]) in_l[u][i] = 0;
      }
    }

    record(next);
    for (std::size_t m = 0; m <= next; ++m) {
      if (out.l_card[next][m] == 0) fail_empty(m, next);
      if (m == next) {
        stable[m] = next;
      } else if (out.l_card[next][m] != out.l_card[n][m]) {
        stable[m] = next;  // L only shrinks, so equal sizes mean equal sets
      }
    }
  }
  out.stabilized_at = stable;

  // Final collections L_m := L_{m,N}, parents re-indexed into L_{m-1}.
  out.levels.resize(N + 1);
  out.source_index.resize(N + 1);
  for (std::size_t m = 0; m <= N; ++m) {
    LevelCollection& lv = out.levels[m];
    lv.level = m;
    lv.length = levels[m].length;
    for (std::size_t i = 0; i < levels[m].size(); ++i) {
      if (!in_l[m][i]) continue;
      out.source_index[m].push_back(i);
      lv.intervals.push_back(levels[m].intervals[i]);
      if (m > 0) {
        const auto& prev = out.source_index[m - 1];
        auto it = std::lower_bound(prev.begin(), prev.end(), levels[m].parents[i]);
        lv.parents.push_back(static_cast<std::size_t>(it - prev.begin()));
      }
    }
  }
  return out;
}

ConditionReport verify_conditions(std::span<const LevelCollection> j_levels,
                                  std::span<const LevelCollection> l_levels,
                                  const CantorSchedule& schedule) {
  ConditionReport rep;
  rep.c1 = rep.c2 = rep.c3 = true;
  if (l_levels.size() != j_levels.size()) {
    rep.c1 = rep.c2 = rep.c3 = false;
    return rep;
  }
  for (std::size_t m = 0; m < l_levels.size(); ++m) {
    const auto& js = j_levels[m].intervals;
    for (const auto& iv : l_levels[m].intervals) {
      if (!std::binary_search(js.begin(), js.end(), iv)) rep.c1 = false;
    }
  }
  for (std::size_t m = 0; m + 1 < l_levels.size(); ++m) {
    const auto& upper = l_levels[m].intervals;
    std::vector<std::uint64_t> inside(upper.size(), 0);
    for (const auto& iv : l_levels[m + 1].intervals) {
      // The last upper interval starting at or before iv.left.
      auto it = std::upper_bound(upper.begin(), upper.end(), iv.left,
                                 [](const Rational& x, const ClosedInterval& u) {
                                   return x < u.left;
                                 });
      bool found = false;
      for (int step = 0; step < 2 && it != upper.begin(); ++step) {
        --it;  // a shared endpoint may place iv at the start of the next interval
        if (it->contains(iv)) {
          ++inside[static_cast<std::size_t>(it - upper.begin())];
          found = true;
          break;
        }
      }
      if (!found) rep.c2 = false;
    }
    const std::uint64_t rm = schedule.branching(m);
    for (auto k : inside) {
      if (2 * k < rm) rep.c3 = false;  // k >= R_m - s_m = R_m / 2
    }
  }

  rep.local_valid = rep.c3 && structurally_valid(local_schedule(schedule), l_levels);
  if (rep.local_valid) {
    // Removals per parent stay within s_m.
    for (std::size_t m = 0; m + 1 < l_levels.size(); ++m) {
      auto begin = child_offsets(l_levels[m], l_levels[m + 1]);
      const std::uint64_t rm = schedule.branching(m);
      for (std::size_t p = 0; p < l_levels[m].size(); ++p) {
        if (2 * (rm - (begin[p + 1] - begin[p])) > rm) rep.local_valid = false;
      }
    }
  }
  return rep;
}

MeasureTable build_measure(std::span<const LevelCollection> levels) {
  MeasureTable t;
  if (levels.empty() || levels[0].size() == 0) throw EmptyLevelError(0);
  t.weights.push_back({Rational(1, 1)});
  for (std::size_t m = 1; m < levels.size(); ++m) {
    if (levels[m].size() == 0) throw EmptyLevelError(m);
    auto begin = child_offsets(levels[m - 1], levels[m]);
    std::vector<Rational> w(levels[m].size());
    for (std::size_t i = 0; i < levels[m].size(); ++i) {
      const std::size_t p = levels[m].parents[i];
      w[i] = t.weights[m - 1][p] / Rational(static_cast<unsigned long>(begin[p + 1] - begin[p]));
    }
    t.weights.push_back(std::move(w));
  }
  return t;
}

std::vector<std::uint64_t> max_window_sums(std::span<const std::uint64_t> masses,
                                           std::size_t max_len, ExecPolicy policy) {
  const std::size_t M = masses.size();
  max_len = std::min(max_len, M);
  std::vector<std::uint64_t> prefix(M + 1, 0);
  for (std::size_t i = 0; i < M; ++i) prefix[i + 1] = prefix[i] + masses[i];
  std::vector<std::uint64_t> W(max_len + 1, 0);
  auto one = [&](std::size_t len) {
    std::uint64_t best = 0;
    const std::uint64_t* p = prefix.data();
    for (std::size_t i = 0; i + len <= M; ++i) best = std::max(best, p[i + len] - p[i]);
    W[len] = best;
  };
  if (policy == ExecPolicy::kSerial) {
    for (std::size_t len = 1; len <= max_len; ++len) one(len);
  } else {
    const long ml = static_cast<long>(max_len);
#pragma omp parallel for schedule(dynamic, 16)
    for (long len = 1; len <= ml; ++len) one(static_cast<std::size_t>(len));
  }
  return W;
}

MdpReport verify_mdp_bound(std::span<const LevelCollection> levels, const MeasureTable& measure,
                           const CantorSchedule& schedule, const Rational& s,
                           const MdpOptions& options) {
  if (s <= 0 || s > 1) throw DomainError("s must lie in (0, 1]");
  if (levels.empty()) throw EmptyLevelError(0);
  const std::size_t N = levels.size() - 1;
  const std::size_t n0 = options.n0;
  if (n0 > N) throw DomainError("n0 beyond the built depth");
  const unsigned long p = s.get_num().get_ui(), q = s.get_den().get_ui();
  const ClosedInterval I = levels[0].intervals.at(0);

  MdpReport rep;
  rep.s = s;
  rep.n0 = n0;

  auto R = [&](std::size_t i) -> Rational {
    return Rational(static_cast<unsigned long>(schedule.branching(i)));
  };
  auto t = [&](std::size_t i) -> Rational { return R(i) / 2; };

  rep.hypothesis_ok = true;
  for (std::size_t n = n0 + 1; n < N; ++n) {
    if (pow_rational(R(n), p) > pow_rational(t(n), q)) rep.hypothesis_ok = false;
  }

  Rational prod_r(1), prod_t(1);
  for (std::size_t i = 0; i <= n0; ++i) {
    prod_r *= R(i);
    prod_t *= t(i);
  }
  rep.a_pow_q = pow_rational(Rational(2), q) * pow_rational(I.length(), -static_cast<long>(p)) *
                pow_rational(prod_r, p) / pow_rational(prod_t, q);
  rep.a = std::pow(rep.a_pow_q.get_d(), 1.0 / static_cast<double>(q));
  rep.max_ratio_pow_q = 0;

  const Rational delta_n0 = levels[n0].length;
  auto check = [&](const ClosedInterval& B, const Rational& mass) {
    const Rational len = B.length();
    if (len <= 0 || len >= delta_n0) return;
    ++rep.tested;
    const Rational ratio = pow_rational(mass, q) / pow_rational(len, p);
    if (ratio > rep.max_ratio_pow_q) rep.max_ratio_pow_q = ratio;
    if (ratio > rep.a_pow_q && rep.violations.size() < 16) rep.violations.push_back({B, mass});
  };

  const LevelCollection& last = levels[N];
  const std::vector<Rational>& w = measure.weights.at(N);

  if (options.grid) {
    const Rational cells_r = I.length() / last.length;
    const Integer M = cells_r.get_num();
    if (cells_r.get_den() != 1 || M > Integer(static_cast<unsigned long>(options.max_grid_cells))) {
      throw DomainError("grid family too large; raise max_grid_cells or disable the grid");
    }
    Integer D(1);
    for (const auto& x : w) mpz_lcm(D.get_mpz_t(), D.get_mpz_t(), x.get_den_mpz_t());
    if (!D.fits_slong_p()) throw DomainError("mass denominators exceed 64 bits");
    std::vector<std::uint64_t> masses(M.get_ui(), 0);
    for (std::size_t i = 0; i < last.size(); ++i) {
      const std::size_t c = floor_rational((last.intervals[i].left - I.left) / last.length).get_ui();
      masses[c] = Integer(w[i] * Rational(D)).get_ui();
    }
    // Lengths l * δ_N < δ_{n0}.
    const std::size_t max_len = floor_rational(delta_n0 / last.length).get_ui() - 1;
    const auto W = max_window_sums(masses, max_len, options.exec);
    const Rational Dr(D);
    for (std::size_t len = 1; len < W.size(); ++len) {
      const Rational blen = last.length * Rational(static_cast<unsigned long>(len));
      const Rational mass = Rational(static_cast<unsigned long>(W[len])) / Dr;
      const std::uint64_t before = rep.violations.size();
      // One representative (a maximising window) stands for the whole length class.
      check(ClosedInterval(I.left, I.left + blen), mass);
      rep.tested += masses.size() - len;  // the other windows of this length
      if (rep.violations.size() > before) {
        std::uint64_t run = 0;
        std::size_t at = 0;
        for (std::size_t i = 0; i < masses.size(); ++i) {
          run += masses[i];
          if (i >= len) run -= masses[i - len];
          if (i + 1 >= len && run == W[len]) {
            at = i + 1 - len;
            break;
          }
        }
        const Rational left = I.left + last.length * Rational(static_cast<unsigned long>(at));
        rep.violations.back().interval = ClosedInterval(left, left + blen);
      }
    }
  }

  if (options.construction) {
    for (std::size_t m = n0 + 1; m <= N; ++m) {
      for (std::size_t i = 0; i < levels[m].size(); ++i) {
        check(levels[m].intervals[i], measure.weights[m][i]);
      }
    }
  }

  if (options.random_count > 0) {
    std::vector<Rational> prefix(last.size() + 1, Rational(0));
    for (std::size_t i = 0; i < last.size(); ++i) prefix[i + 1] = prefix[i] + w[i];
    std::mt19937_64 rng(options.seed);
    const Rational unit = last.length / 1024;
    const std::uint64_t span = floor_rational(I.length() / unit).get_ui();
    const std::uint64_t max_units = floor_rational(delta_n0 / unit).get_ui();
    for (std::size_t r = 0; r < options.random_count; ++r) {
      const std::uint64_t len_units = 1 + rng() % std::max<std::uint64_t>(1, max_units - 1);
      if (len_units >= span) continue;
      const std::uint64_t start = rng() % (span - len_units);
      const Rational left = I.left + unit * Rational(static_cast<unsigned long>(start));
      const ClosedInterval B(left, left + unit * Rational(static_cast<unsigned long>(len_units)));
      auto lo = std::partition_point(last.intervals.begin(), last.intervals.end(),
                                     [&](const ClosedInterval& J) { return J.right <= B.left; });
      auto hi = std::partition_point(lo, last.intervals.end(),
                                     [&](const ClosedInterval& J) { return J.left < B.right; });
      const auto a = static_cast<std::size_t>(lo - last.intervals.begin());
      const auto b = static_cast<std::size_t>(hi - last.intervals.begin());
      check(B, prefix[b] - prefix[a]);
    }
  }

  rep.max_ratio = std::pow(rep.max_ratio_pow_q.get_d(), 1.0 / static_cast<double>(q));
  rep.pass = rep.hypothesis_ok && rep.violations.empty();
  return rep;
}

DistributionReport check_distribution(std::span<const LevelCollection> j_levels,
                                      std::span<const LevelCollection> t_levels,
                                      const CantorSchedule& schedule) {
  DistributionReport rep;
  const std::size_t depth = std::min(j_levels.size(), t_levels.size());
  for (std::size_t n = 0; n < depth; ++n) {
    const auto& a = j_levels[n].intervals;
    const auto& b = t_levels[n].intervals;
    std::uint64_t h = 0;
    for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
      if (a[i] == b[j]) {
        ++h;
        ++i;
        ++j;
      } else if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    rep.h.push_back(h);
    if (h == 0 && !rep.first_empty) rep.first_empty = n;
  }
  for (std::size_t n = 0; n + 1 < rep.h.size(); ++n) {
    if (4 * rep.h[n + 1] < schedule.branching(n) * rep.h[n] && !rep.first_growth_failure) {
      rep.first_growth_failure = n;
    }
  }
  rep.nonempty = !rep.first_empty.has_value();
  rep.growth = !rep.first_growth_failure.has_value();
  return rep;
}

namespace {

// g[m][i]: the fewest level-target J intervals a (I, R, R - s) family can be
// forced to keep below J_m[i].
std::vector<std::vector<std::uint64_t>> adversary_values(std::span<const LevelCollection> j,
                                                         const CantorSchedule& schedule,
                                                         std::size_t target) {
  if (target >= j.size()) throw DomainError("adversary target beyond the built depth");
  std::vector<std::vector<std::uint64_t>> g(target + 1);
  g[target].assign(j[target].size(), 1);
  for (std::size_t m = target; m-- > 0;) {
    const std::uint64_t rm = schedule.branching(m);
    const std::uint64_t keep = (rm + 1) / 2;  // ceil(s_m)
    auto begin = child_offsets(j[m], j[m + 1]);
    g[m].assign(j[m].size(), 0);
    for (std::size_t i = 0; i < j[m].size(); ++i) {
      std::vector<std::uint64_t> vals(g[m + 1].begin() + static_cast<long>(begin[i]),
                                      g[m + 1].begin() + static_cast<long>(begin[i + 1]));
      const std::uint64_t zeros = rm - vals.size();
      if (zeros >= keep) continue;
      std::sort(vals.begin(), vals.end());
      std::uint64_t sum = 0;
      for (std::uint64_t k = 0; k < keep - zeros; ++k) sum += vals[k];
      g[m][i] = sum;
    }
  }
  return g;
}

}  // namespace

std::uint64_t adversarial_min_hits(std::span<const LevelCollection> j_levels,
                                   const CantorSchedule& schedule, std::size_t target) {
  return adversary_values(j_levels, schedule, target)[0][0];
}

std::vector<LevelCollection> adversarial_t(std::span<const LevelCollection> j,
                                           const CantorSchedule& schedule, std::size_t target) {
  const auto g = adversary_values(j, schedule, target);
  std::vector<LevelCollection> t(target + 1);
  t[0] = j[0];
  std::vector<long> j_index{0};  // J index of each T interval, or -1

  for (std::size_t m = 0; m < target; ++m) {
    const std::uint64_t rm = schedule.branching(m);
    const std::uint64_t keep = (rm + 1) / 2;
    const auto begin = child_offsets(j[m], j[m + 1]);
    LevelCollection& nx = t[m + 1];
    nx.level = m + 1;
    nx.length = t[m].length / Rational(static_cast<unsigned long>(rm));
    std::vector<long> next_index;
    for (std::size_t p = 0; p < t[m].size(); ++p) {
      // (g, is J, slot, J index) per child slot.
      std::vector<std::tuple<std::uint64_t, int, std::uint64_t, long>> slots;
      for (std::uint64_t s = 0; s < rm; ++s) slots.emplace_back(0, 0, s, -1);
      if (j_index[p] >= 0) {
        const auto jp = static_cast<std::size_t>(j_index[p]);
        for (std::size_t c = begin[jp]; c < begin[jp + 1]; ++c) {
          const std::uint64_t s = slot_of(j[m], j[m + 1], c);
          slots[s] = {g[m + 1][c], 1, s, static_cast<long>(c)};
        }
      }
      std::sort(slots.begin(), slots.end());
      slots.resize(keep);
      std::sort(slots.begin(), slots.end(),
                [](const auto& a, const auto& b) { return std::get<2>(a) < std::get<2>(b); });
      const ClosedInterval& parent = t[m].intervals[p];
      for (const auto& [gv, is_j, s, ji] : slots) {
        const Rational left = parent.left + nx.length * Rational(static_cast<unsigned long>(s));
        const Rational right = s + 1 == rm ? parent.right : Rational(left + nx.length);
        nx.intervals.emplace_back(left, right);
        nx.parents.push_back(p);
        next_index.push_back(ji);
      }
    }
    j_index = std::move(next_index);
  }
  return t;
}

}  // namespace gcantor
