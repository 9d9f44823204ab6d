#pragma once

// Non-emptiness and dimension certificates for an (I, R, r) schedule,
// computed exactly when budgets are rational and by refined enclosures
// otherwise.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcantor/cantor_core.hpp"

namespace gcantor {

class DegenerateRecursion : public std::runtime_error {
 public:
  explicit DegenerateRecursion(std::size_t index);
  std::size_t index;
};

/// t_0 = R_0 - r_{0,0};
/// t_n = R_n - r_{n,n} - sum_{k=1}^{n} r_{n-k,n} / (t_{n-1} ... t_{n-k}).
/// Stops after the first term that is not strictly positive.
struct TSequence {
  std::vector<Enclosure> values;  // points when every budget is exact
  std::optional<std::size_t> first_nonpositive;

  /// t_index; throws DegenerateRecursion when the recursion stopped before it.
  const Enclosure& at(std::size_t index) const;
};

TSequence t_sequence(const CantorSchedule& schedule, std::size_t depth);

struct NonEmptinessCertificate {
  std::vector<Enclosure> t_values;  // t_0 ... t_depth (or up to the failure)
  bool pass = false;
  std::optional<std::size_t> first_failure;
  /// survivor_lower_bounds[n] bounds #J_n from below by prod_{i<n} t_i
  /// (lower endpoint); only filled when the certificate passes.
  std::vector<Rational> survivor_lower_bounds;
};

NonEmptinessCertificate certify_nonempty(const CantorSchedule& schedule, std::size_t depth);

struct DimensionConditionRow {
  std::size_t n = 0;
  std::uint64_t branching = 0;
  Enclosure lhs;  // sum_k r_{n-k,n} prod_{i=1}^k 4/R_{n-i}
  Rational rhs;   // R_n / 4
  bool ok = false;
};

struct DimensionCertificate {
  std::vector<DimensionConditionRow> rows;  // n = 0 ... depth
  bool branching_at_least_4 = false;
  bool pass = false;
  std::optional<std::size_t> first_failure;
};

DimensionCertificate check_dimension_condition(const CantorSchedule& schedule, std::size_t depth);

struct DimensionBound {
  Enclosure bound;             // the reported lower bound for the liminf
  bool rigorous = false;       // false: finite-horizon minimum ("empirical liminf")
  Enclosure horizon_minimum;   // min_{n <= horizon} (1 - log_{R_n} 2)
  std::size_t horizon = 0;
  std::string note;
};

/// 1 - log 2 / log R, exact when R is a power of two.
Enclosure one_minus_log_r_2(std::uint64_t r);

/// Requires a passing dimension-condition certificate; its depth is the horizon.
/// When R_n is nondecreasing (or constant past an explicit list), the term
/// at the horizon is a rigorous lower bound for the liminf; otherwise the
/// horizon minimum is returned and labelled empirical.
DimensionBound dimension_lower_bound(const CantorSchedule& schedule,
                                     const DimensionCertificate& dimension_condition);

}  // namespace gcantor
