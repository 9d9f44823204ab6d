#include "gcantor/cantor_core.hpp"

#include <omp.h>

#include <algorithm>
#include <sstream>

namespace gcantor {

void set_thread_count(int threads) {
  if (threads >= 1) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

// --- Budget -----------------------------------------------------------------

Budget::Budget(Rational exact) : exact_(std::move(exact)) {
  if (*exact_ < 0) throw DomainError("budgets must be non-negative");
}

Budget::Budget(Refiner refine) : refine_(std::move(refine)) {}

const Rational& Budget::exact() const {
  if (!exact_) throw DomainError("budget is not an exact rational");
  return *exact_;
}

Enclosure Budget::enclose(int bits) const {
  if (exact_) return Enclosure::point(*exact_);
  return refine_(bits);
}

Refiner Budget::refiner() const {
  if (exact_) {
    Rational v = *exact_;
    return [v](int) { return Enclosure::point(v); };
  }
  return refine_;
}

Budget Budget::operator+(const Budget& other) const {
  if (is_exact() && other.is_exact()) return Budget(Rational(*exact_ + *other.exact_));
  Refiner a = refiner(), b = other.refiner();
  return Budget(Refiner([a, b](int bits) { return a(bits) + b(bits); }));
}

Budget Budget::scaled(const Rational& factor) const {
  if (factor < 0) throw DomainError("negative budget scale");
  if (is_exact()) return Budget(Rational(*exact_ * factor));
  Refiner a = refiner();
  Enclosure f = Enclosure::point(factor);
  return Budget(Refiner([a, f](int bits) { return a(bits) * f; }));
}

bool within_budget(std::uint64_t count, const Budget& budget) {
  Rational c(Integer(static_cast<unsigned long>(count)));
  if (budget.is_exact()) return c <= budget.exact();
  return compare_refined(budget.refiner(), c) >= 0;
}

// --- CantorSchedule ---------------------------------------------------------

CantorSchedule CantorSchedule::from_explicit(ClosedInterval root, Explicit data) {
  if (root.length() <= 0) throw DomainError("schedule root must have positive length");
  if (data.branching.empty()) throw DomainError("branching sequence is empty");
  for (auto r : data.branching) {
    if (r < 2) throw DomainError("every R_n must be at least 2");
  }
  for (const auto& [key, value] : data.entries) {
    if (key.first > key.second) throw DomainError("budget entry with m > n");
    if (value < 0) throw DomainError("negative budget entry");
  }
  for (const auto& d : data.diagonals) {
    if (d.value < 0) throw DomainError("negative diagonal budget");
  }

  CantorSchedule s;
  s.root_ = std::move(root);
  s.explicit_ = std::move(data);
  s.label_ = "explicit";
  return s;
}

CantorSchedule CantorSchedule::generated(ClosedInterval root, BranchingFn branching,
                                         ColumnFn column, bool nondecreasing, std::string label) {
  if (root.length() <= 0) throw DomainError("schedule root must have positive length");
  CantorSchedule s;
  s.root_ = std::move(root);
  s.branching_ = std::move(branching);
  s.column_ = std::move(column);
  s.nondecreasing_ = nondecreasing;
  s.label_ = std::move(label);
  return s;
}

std::uint64_t CantorSchedule::branching(std::size_t n) const {
  if (explicit_) {
    const auto& b = explicit_->branching;
    return n < b.size() ? b[n] : b.back();
  }
  std::uint64_t r = branching_(n);
  if (r < 2) throw DomainError("generated R_n below 2");
  return r;
}

std::vector<BudgetEntry> CantorSchedule::column(std::size_t n) const {
  if (!explicit_) return column_(n);
  std::map<std::size_t, Rational> sums;
  for (auto it = explicit_->entries.lower_bound({0, 0}); it != explicit_->entries.end(); ++it) {
    if (it->first.second == n) sums[it->first.first] += it->second;
  }
  for (const auto& d : explicit_->diagonals) {
    if (d.offset <= n) sums[n - d.offset] += d.value;
  }
  std::vector<BudgetEntry> out;
  for (auto& [m, v] : sums) {
    if (v != 0) out.push_back({m, Budget(v)});
  }
  return out;
}

Budget CantorSchedule::budget(std::size_t m, std::size_t n) const {
  for (auto& e : column(n)) {
    if (e.m == m) return e.value;
  }
  return Budget();
}

const CantorSchedule::Explicit& CantorSchedule::explicit_data() const {
  if (!explicit_) throw DomainError("schedule is generator-backed");
  return *explicit_;
}

bool CantorSchedule::branching_nondecreasing_from(std::size_t from) const {
  if (!explicit_) return nondecreasing_;
  const auto& b = explicit_->branching;
  for (std::size_t i = from + 1; i < b.size(); ++i) {
    if (b[i] < b[i - 1]) return false;
  }
  return true;
}

// --- Levels -----------------------------------------------------------------

LevelCollection root_level(const CantorSchedule& schedule) {
  LevelCollection l;
  l.level = 0;
  l.length = schedule.root().length();
  l.intervals.push_back(schedule.root());
  return l;
}

std::uint64_t RemovalLedger::total() const {
  std::uint64_t t = 0;
  for (auto& [k, v] : counts) t += v;
  return t;
}

BudgetExceeded::BudgetExceeded(std::size_t m_, std::size_t ancestor_, std::size_t level_,
                               std::uint64_t count_)
    : std::runtime_error([&] {
        std::ostringstream s;
        s << "budget exceeded: " << count_ << " removals at level " << level_
          << " charged to stratum " << m_ << ", ancestor " << ancestor_;
        return s.str();
      }()),
      m(m_),
      ancestor(ancestor_),
      level(level_),
      count(count_) {}

std::size_t ancestor_index(std::span<const LevelCollection> history, std::size_t level,
                           std::size_t index, std::size_t m) {
  while (level > m) {
    index = history[level].parents.at(index);
    --level;
  }
  return index;
}

LevelCollection split(const LevelCollection& parents, std::uint64_t branching, ExecPolicy policy) {
  if (branching < 2) throw DomainError("split requires R_n >= 2");
  LevelCollection out;
  out.level = parents.level + 1;
  out.length = parents.length / Rational(Integer(static_cast<unsigned long>(branching)));
  const std::size_t per = static_cast<std::size_t>(branching);
  const std::size_t count = parents.size() * per;
  out.intervals.resize(count);
  out.parents.resize(count);

  auto fill = [&](std::size_t p) {
    Rational left = parents.intervals[p].left;
    for (std::size_t j = 0; j < per; ++j) {
      Rational right = left + out.length;
      if (j + 1 == per) right = parents.intervals[p].right;
      out.intervals[p * per + j] = ClosedInterval(left, right);
      out.parents[p * per + j] = p;
      left = right;
    }
  };

  const auto np = static_cast<std::ptrdiff_t>(parents.size());
  if (policy == ExecPolicy::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < np; ++p) fill(static_cast<std::size_t>(p));
  } else {
    for (std::ptrdiff_t p = 0; p < np; ++p) fill(static_cast<std::size_t>(p));
  }
  return out;
}

RemovalOutcome apply_removals(const LevelCollection& candidates, const RemovalRule& rule,
                              const CantorSchedule& schedule,
                              std::span<const LevelCollection> history, BudgetPolicy policy) {
  if (history.empty() || candidates.level != history.size()) {
    throw LevelMismatch("candidates do not follow the supplied history");
  }
  const std::size_t n = history.size() - 1;
  RemovalContext ctx{n, candidates, history, schedule};
  std::vector<Deletion> deletions = rule ? rule(ctx) : std::vector<Deletion>{};

  std::vector<char> deleted(candidates.size(), 0);
  for (const auto& d : deletions) {
    if (d.child >= candidates.size()) throw InvalidRule("deletion references a missing candidate");
    if (d.stratum > n) throw InvalidRule("deletion charged to a stratum above n");
    if (deleted[d.child]) throw InvalidRule("candidate deleted twice");
    deleted[d.child] = 1;
  }
  // Descending stratum order: II^n_{n+1} first, down to II^0_{n+1}.
  std::stable_sort(deletions.begin(), deletions.end(),
                   [](const Deletion& a, const Deletion& b) { return a.stratum > b.stratum; });

  RemovalOutcome out;
  out.ledger.level = n + 1;
  for (const auto& d : deletions) {
    std::size_t parent = candidates.parents[d.child];
    std::size_t anc = ancestor_index(history, n, parent, d.stratum);
    ++out.ledger.counts[{d.stratum, anc}];
  }

  std::map<std::size_t, Budget> column;
  for (auto& e : schedule.column(n)) column.emplace(e.m, e.value);
  // Check in descending stratum order so the first reported breach is the
  // first one the removal procedure would hit.
  for (auto it = out.ledger.counts.rbegin(); it != out.ledger.counts.rend(); ++it) {
    const auto [m, anc] = it->first;
    auto b = column.find(m);
    bool ok = b != column.end() ? within_budget(it->second, b->second) : it->second == 0;
    if (!ok) {
      if (policy == BudgetPolicy::kEnforce) throw BudgetExceeded(m, anc, n + 1, it->second);
      out.breaches.push_back({m, anc, it->second});
    }
  }

  out.survivors.level = candidates.level;
  out.survivors.length = candidates.length;
  out.survivors.intervals.reserve(candidates.size() - deletions.size());
  out.survivors.parents.reserve(candidates.size() - deletions.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (deleted[i]) continue;
    out.survivors.intervals.push_back(candidates.intervals[i]);
    out.survivors.parents.push_back(candidates.parents[i]);
  }
  return out;
}

BuildResult build(const CantorSchedule& schedule, const RemovalRule& rule, std::size_t depth,
                  const BuildOptions& options) {
  BuildResult result;
  result.levels.push_back(root_level(schedule));
  for (std::size_t n = 0; n < depth; ++n) {
    const LevelCollection& current = result.levels.back();
    std::uint64_t r = schedule.branching(n);
    if (current.size() * r > options.node_cap) {
      std::ostringstream s;
      s << "level " << n + 1 << " would hold " << current.size() * r
        << " candidates, above the node cap of " << options.node_cap;
      throw NodeCapExceeded(s.str());
    }
    LevelCollection candidates = split(current, r, options.exec);
    RemovalOutcome outcome =
        apply_removals(candidates, rule, schedule, result.levels, options.budgets);
    result.breaches.insert(result.breaches.end(), outcome.breaches.begin(), outcome.breaches.end());
    result.ledgers.push_back(std::move(outcome.ledger));
    result.levels.push_back(std::move(outcome.survivors));
    if (result.levels.back().size() == 0) {
      result.empty_level = n + 1;
      break;
    }
  }
  return result;
}

bool counting_inequality_holds(const CantorSchedule& schedule,
                               std::span<const LevelCollection> levels) {
  for (std::size_t n = 0; n + 1 < levels.size(); ++n) {
    Rational lhs(Integer(static_cast<unsigned long>(levels[n + 1].size())));
    Rational base = Rational(Integer(static_cast<unsigned long>(schedule.branching(n)))) *
                    Rational(Integer(static_cast<unsigned long>(levels[n].size())));
    std::vector<BudgetEntry> col = schedule.column(n);
    Refiner rhs = [&](int bits) {
      Enclosure acc = Enclosure::point(base);
      for (auto& e : col) {
        Rational count(Integer(static_cast<unsigned long>(levels[e.m].size())));
        acc = acc - e.value.enclose(bits) * Enclosure::point(count);
      }
      return acc;
    };
    if (compare_refined(rhs, lhs) > 0) return false;
  }
  return true;
}

bool structurally_valid(const CantorSchedule& schedule, std::span<const LevelCollection> levels) {
  if (levels.empty()) return true;
  if (levels[0].size() != 1 || !(levels[0].intervals[0] == schedule.root())) return false;
  Rational expected = schedule.root().length();
  for (std::size_t n = 0; n < levels.size(); ++n) {
    const auto& lv = levels[n];
    if (lv.level != n || lv.length != expected) return false;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      if (lv.intervals[i].length() != expected) return false;
      if (i > 0 && lv.intervals[i - 1].right > lv.intervals[i].left) return false;
      if (n > 0) {
        if (lv.parents.size() != lv.size() || lv.parents[i] >= levels[n - 1].size()) return false;
        if (!levels[n - 1].intervals[lv.parents[i]].contains(lv.intervals[i])) return false;
      }
    }
    expected /= Rational(Integer(static_cast<unsigned long>(schedule.branching(n))));
  }
  return true;
}

CantorSchedule intersect_schedules(std::span<const CantorSchedule> schedules,
                                   std::size_t frame_horizon) {
  if (schedules.empty()) throw DomainError("intersect_schedules needs at least one schedule");
  const CantorSchedule& first = schedules[0];
  bool all_explicit = true;
  std::size_t horizon = frame_horizon;
  for (const auto& s : schedules) {
    if (!(s.root() == first.root())) throw MismatchedFrame("schedules have different roots");
    all_explicit = all_explicit && s.is_explicit();
  }
  if (all_explicit) {
    horizon = 0;
    for (const auto& s : schedules) horizon = std::max(horizon, s.explicit_data().branching.size());
  }
  for (const auto& s : schedules) {
    for (std::size_t n = 0; n < horizon; ++n) {
      if (s.branching(n) != first.branching(n)) {
        throw MismatchedFrame("schedules have different branching sequences");
      }
    }
  }
  if (schedules.size() == 1) return first;

  if (all_explicit) {
    CantorSchedule::Explicit data;
    for (std::size_t n = 0; n < horizon; ++n) data.branching.push_back(first.branching(n));
    for (const auto& s : schedules) {
      for (const auto& [key, v] : s.explicit_data().entries) data.entries[key] += v;
      for (const auto& d : s.explicit_data().diagonals) {
        auto same = std::find_if(data.diagonals.begin(), data.diagonals.end(),
                                 [&](const DiagonalBudget& x) { return x.offset == d.offset; });
        if (same == data.diagonals.end()) {
          data.diagonals.push_back(d);
        } else {
          same->value += d.value;
        }
      }
    }
    return CantorSchedule::from_explicit(first.root(), std::move(data));
  }

  std::vector<CantorSchedule> parts(schedules.begin(), schedules.end());
  auto column = [parts](std::size_t n) {
    std::map<std::size_t, Budget> sums;
    for (const auto& s : parts) {
      for (auto& e : s.column(n)) {
        auto it = sums.find(e.m);
        if (it == sums.end()) {
          sums.emplace(e.m, e.value);
        } else {
          it->second = it->second + e.value;
        }
      }
    }
    std::vector<BudgetEntry> out;
    for (auto& [m, b] : sums) out.push_back({m, b});
    return out;
  };
  auto branching = [f = first](std::size_t n) { return f.branching(n); };
  std::string label = "intersection(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    label += (i ? "," : "") + parts[i].label();
  }
  label += ")";
  return CantorSchedule::generated(first.root(), branching, column,
                                   first.branching_nondecreasing_from(0), label);
}

LevelCollection intersect_levels(const LevelCollection& a, const LevelCollection& b) {
  if (a.level != b.level) throw LevelMismatch("intersect_levels: different levels");
  if (a.length != b.length) throw LevelMismatch("intersect_levels: different interval lengths");
  LevelCollection out;
  out.level = a.level;
  out.length = a.length;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a.intervals[i] == b.intervals[j]) {
      out.intervals.push_back(a.intervals[i]);
      if (!a.parents.empty()) out.parents.push_back(a.parents[i]);
      ++i;
      ++j;
    } else if (a.intervals[i] < b.intervals[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

std::vector<LevelCollection> intersect_builds(std::span<const LevelCollection> a,
                                              std::span<const LevelCollection> b) {
  std::vector<LevelCollection> out;
  const std::size_t depth = std::min(a.size(), b.size());
  for (std::size_t n = 0; n < depth; ++n) {
    LevelCollection c = intersect_levels(a[n], b[n]);
    if (n > 0) {
      const auto& prev = out.back().intervals;
      c.parents.assign(c.size(), 0);
      for (std::size_t i = 0; i < c.size(); ++i) {
        auto it = std::upper_bound(prev.begin(), prev.end(), c.intervals[i].left,
                                   [](const Rational& x, const ClosedInterval& iv) {
                                     return x < iv.left;
                                   });
        // The containing parent is the last one starting at or before left.
        while (it != prev.begin()) {
          --it;
          if (it->contains(c.intervals[i])) break;
        }
        c.parents[i] = static_cast<std::size_t>(it - prev.begin());
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace gcantor
