#pragma once

// Local Cantor subsets: the L_{m,n} / R_{m,n} extraction, the uniform mass
// distribution on the extracted levels, the μ(B) <= a|B|^s check and the
// distribution checker for an independently built (I, R, R - s) family.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gcantor/cantor_core.hpp"
#include "gcantor/certify.hpp"

namespace gcantor {

class EmptyExtraction : public std::runtime_error {
 public:
  EmptyExtraction(std::size_t m, std::size_t n);
  std::size_t m, n;
};

/// EmptyExtraction under a passing dimension-condition certificate.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLevelError : public std::runtime_error {
 public:
  explicit EmptyLevelError(std::size_t level);
  std::size_t level;
};

/// Same root and branching as `base`, diagonal budgets s_n = R_n / 2.
CantorSchedule local_schedule(const CantorSchedule& base);

struct ExtractOptions {
  /// When set and passing, an empty L_{m,n} is escalated to InvariantViolation.
  const DimensionCertificate* certificate = nullptr;
  /// Keep every L_{m,n} (indices into J_m) and R_{m,n} (cell ids) for inspection.
  bool keep_history = false;
};

/// Cells at level m >= 1 are numbered parent * R_{m-1} + slot, where parent
/// indexes J_{m-1}; the root is cell 0. Dumped survivors and removed
/// candidates share this numbering.
struct LocalExtraction {
  std::vector<LevelCollection> levels;                   // L_0 ... L_N
  std::vector<std::vector<std::size_t>> source_index;    // L_m[i] is J_m[source_index[m][i]]
  std::vector<std::vector<std::size_t>> l_card;          // [n][m] = #L_{m,n}
  std::vector<std::vector<std::size_t>> dump_card;       // [n][m] = #R_{m,n}
  std::vector<std::size_t> stabilized_at;                // smallest n with L_{m,n} = L_{m,N}

  // Populated with keep_history: [n][m].
  std::vector<std::vector<std::vector<std::size_t>>> l_history;
  std::vector<std::vector<std::vector<std::uint64_t>>> dump_history;
};

LocalExtraction extract_local(std::span<const LevelCollection> levels,
                              const CantorSchedule& schedule, const ExtractOptions& options = {});

struct ConditionReport {
  bool c1 = false;  // L_m ⊆ J_m
  bool c2 = false;  // nested
  bool c3 = false;  // every L_m interval holds >= R_m - s_m L_{m+1} intervals
  bool local_valid = false;  // a valid local (I, R, s) build with s_n = R_n / 2
  bool ok() const { return c1 && c2 && c3 && local_valid; }
};

/// Exhaustive interval-level checks, independent of the extraction's indices.
ConditionReport verify_conditions(std::span<const LevelCollection> j_levels,
                                  std::span<const LevelCollection> l_levels,
                                  const CantorSchedule& schedule);

struct MeasureTable {
  std::vector<std::vector<Rational>> weights;  // aligned with the levels' intervals
};

MeasureTable build_measure(std::span<const LevelCollection> levels);

struct MdpOptions {
  std::size_t n0 = 0;
  bool grid = true;              // every [iδ_N, jδ_N] inside the root
  bool construction = true;      // every built interval
  std::size_t random_count = 0;  // random rational intervals
  std::uint64_t seed = 1;
  ExecPolicy exec = ExecPolicy::kSerial;
  std::uint64_t max_grid_cells = 1u << 20;
};

struct MdpViolation {
  ClosedInterval interval;
  Rational mass_bound;
};

struct MdpReport {
  Rational s;
  std::size_t n0 = 0;
  bool hypothesis_ok = false;   // R_n^s <= t_n for n0 < n < N
  Rational a_pow_q;             // a^q with s = p/q
  double a = 0;                 // approximate a
  Rational max_ratio_pow_q;     // max over tested B of (μ(B)/|B|^s)^q
  double max_ratio = 0;
  std::uint64_t tested = 0;
  std::vector<MdpViolation> violations;
  bool pass = false;
};

/// Checks μ(B) <= a|B|^s with a = 2|I|^{-s} prod_{i<=n0} R_i^s / t_i and
/// t_i = R_i / 2, for test intervals with |B| < δ_{n0}. Exact: both sides
/// are raised to the power q. μ(B) is bounded by the level-N masses whose
/// intervals overlap B in more than a point (the limit measure has no atoms).
MdpReport verify_mdp_bound(std::span<const LevelCollection> levels, const MeasureTable& measure,
                           const CantorSchedule& schedule, const Rational& s,
                           const MdpOptions& options = {});

/// W[l] = max_i sum_{c=i}^{i+l-1} masses[c] for l = 1..max_len (W[0] = 0).
std::vector<std::uint64_t> max_window_sums(std::span<const std::uint64_t> masses,
                                           std::size_t max_len, ExecPolicy policy);

struct DistributionReport {
  std::vector<std::uint64_t> h;    // h(n) = #(T_n ∩ J_n)
  bool nonempty = false;           // h(n) >= 1 for all n
  bool growth = false;             // 4 h(n+1) >= R_n h(n) for all n
  std::optional<std::size_t> first_empty;
  std::optional<std::size_t> first_growth_failure;
};

DistributionReport check_distribution(std::span<const LevelCollection> j_levels,
                                      std::span<const LevelCollection> t_levels,
                                      const CantorSchedule& schedule);

/// A (I, R, R - s) local family T_0 ... T_target minimising #(T_target ∩ J_target):
/// each kept interval keeps ceil(R_m / 2) children, chosen to avoid J.
std::vector<LevelCollection> adversarial_t(std::span<const LevelCollection> j_levels,
                                           const CantorSchedule& schedule, std::size_t target);

/// The minimum of #(T_target ∩ J_target) over all such families.
std::uint64_t adversarial_min_hits(std::span<const LevelCollection> j_levels,
                                   const CantorSchedule& schedule, std::size_t target);

}  // namespace gcantor
