#pragma once

// The (I, R, r) Cantor framework: splitting every survivor into R_n equal
// closed children, removing children under per-ancestor budgets r_{m,n},
// building nested levels J_0 ⊃ J_1 ⊃ ..., and intersecting schedules.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gcantor/exec.hpp"
#include "gcantor/rigor.hpp"

namespace gcantor {

/// A removal budget r_{m,n}: an exact rational, or an irrational quantity
/// available through a refiner (e.g. 7 log²R n² (log* n)²).
class Budget {
 public:
  Budget() : exact_(Rational(0)) {}
  explicit Budget(Rational exact);
  explicit Budget(Refiner refine);

  bool is_exact() const { return exact_.has_value(); }
  const Rational& exact() const;
  Enclosure enclose(int bits) const;
  Refiner refiner() const;

  Budget operator+(const Budget& other) const;
  Budget scaled(const Rational& factor) const;

 private:
  std::optional<Rational> exact_;
  Refiner refine_;
};

/// count <= budget, decided exactly or by refinement.
bool within_budget(std::uint64_t count, const Budget& budget);

struct BudgetEntry {
  std::size_t m = 0;
  Budget value;
};

/// r_{n-offset, n} = value for every n >= offset.
struct DiagonalBudget {
  std::size_t offset = 0;
  Rational value;
};

class CantorSchedule {
 public:
  using BranchingFn = std::function<std::uint64_t(std::size_t)>;
  using ColumnFn = std::function<std::vector<BudgetEntry>(std::size_t)>;

  struct Explicit {
    std::vector<std::uint64_t> branching;  // the last entry repeats
    std::map<std::pair<std::size_t, std::size_t>, Rational> entries;  // (m, n)
    std::vector<DiagonalBudget> diagonals;
  };

  /// Schedule given by finite data; branching beyond the list repeats the
  /// last value, budgets are the listed entries plus diagonal patterns.
  static CantorSchedule from_explicit(ClosedInterval root, Explicit data);

  /// Schedule backed by generators. `nondecreasing` declares that R_n never
  /// decreases; `label` identifies the generator family for frame checks.
  static CantorSchedule generated(ClosedInterval root, BranchingFn branching, ColumnFn column,
                                  bool nondecreasing, std::string label);

  const ClosedInterval& root() const { return root_; }
  std::uint64_t branching(std::size_t n) const;
  /// Nonzero budgets r_{m,n} for fixed n, ascending in m.
  std::vector<BudgetEntry> column(std::size_t n) const;
  Budget budget(std::size_t m, std::size_t n) const;

  bool is_explicit() const { return explicit_.has_value(); }
  const Explicit& explicit_data() const;
  const std::string& label() const { return label_; }

  /// True when R_n is known to be nondecreasing for all n >= `from`.
  bool branching_nondecreasing_from(std::size_t from) const;

 private:
  CantorSchedule() = default;

  ClosedInterval root_;
  BranchingFn branching_;
  ColumnFn column_;
  std::optional<Explicit> explicit_;
  bool nondecreasing_ = false;
  std::string label_;
};

struct LevelCollection {
  std::size_t level = 0;
  Rational length;  // common exact length of every interval
  std::vector<ClosedInterval> intervals;
  std::vector<std::size_t> parents;  // index into level - 1; empty at level 0

  std::size_t size() const { return intervals.size(); }
};

LevelCollection root_level(const CantorSchedule& schedule);

struct RemovalLedger {
  std::size_t level = 0;  // level of the removed candidates
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts;  // (m, ancestor)

  std::uint64_t total() const;
};

struct Deletion {
  std::size_t child = 0;    // index into the candidate collection
  std::size_t stratum = 0;  // the ancestor level m charged for it
};

struct RemovalContext {
  std::size_t level;                          // n: candidates lie at n + 1
  const LevelCollection& candidates;          // II_{n+1}
  std::span<const LevelCollection> history;   // J_0 ... J_n
  const CantorSchedule& schedule;
};

using RemovalRule = std::function<std::vector<Deletion>(const RemovalContext&)>;

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::size_t m, std::size_t ancestor, std::size_t level, std::uint64_t count);
  std::size_t m, ancestor, level;
  std::uint64_t count;
};

class MismatchedFrame : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LevelMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidRule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NodeCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BudgetPolicy { kEnforce, kReport };

struct BudgetBreach {
  std::size_t m = 0;
  std::size_t ancestor = 0;
  std::uint64_t count = 0;
};

struct RemovalOutcome {
  LevelCollection survivors;
  RemovalLedger ledger;
  std::vector<BudgetBreach> breaches;  // only populated under kReport
};

/// Index of the level-m ancestor of interval `index` at level `level`.
std::size_t ancestor_index(std::span<const LevelCollection> history, std::size_t level,
                           std::size_t index, std::size_t m);

LevelCollection split(const LevelCollection& parents, std::uint64_t branching,
                      ExecPolicy policy = ExecPolicy::kSerial);

RemovalOutcome apply_removals(const LevelCollection& candidates, const RemovalRule& rule,
                              const CantorSchedule& schedule,
                              std::span<const LevelCollection> history,
                              BudgetPolicy policy = BudgetPolicy::kEnforce);

struct BuildOptions {
  ExecPolicy exec = ExecPolicy::kSerial;
  BudgetPolicy budgets = BudgetPolicy::kEnforce;
  std::size_t node_cap = 10'000'000;
};

struct BuildResult {
  std::vector<LevelCollection> levels;  // J_0 ... J_k
  std::vector<RemovalLedger> ledgers;   // ledgers[i] produced J_{i+1}
  std::vector<BudgetBreach> breaches;
  std::optional<std::size_t> empty_level;  // first empty level, if any
};

BuildResult build(const CantorSchedule& schedule, const RemovalRule& rule, std::size_t depth,
                  const BuildOptions& options = {});

/// Counting check: #J_{n+1} >= R_n #J_n - sum_k r_{k,n} #J_k.
bool counting_inequality_holds(const CantorSchedule& schedule,
                               std::span<const LevelCollection> levels);

/// Nesting, exact lengths, sortedness and disjoint interiors.
bool structurally_valid(const CantorSchedule& schedule, std::span<const LevelCollection> levels);

/// Sums budgets entrywise; roots and branching must agree.
/// Generated branching sequences are compared on n < frame_horizon.
CantorSchedule intersect_schedules(std::span<const CantorSchedule> schedules,
                                   std::size_t frame_horizon = 256);

/// Intervals present in both collections. Parent indices refer to a's
/// previous level.
LevelCollection intersect_levels(const LevelCollection& a, const LevelCollection& b);

/// Level-by-level intersection of two builds, with parents relinked.
std::vector<LevelCollection> intersect_builds(std::span<const LevelCollection> a,
                                              std::span<const LevelCollection> b);

}  // namespace gcantor
