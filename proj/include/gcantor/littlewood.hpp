#pragma once

// Mixed-Littlewood instantiation: D-adic pseudo-norms, heights, exclusion
// intervals around rationals, parameter validation, candidate enumeration,
// level construction (full and witness mode) and independent verification.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gcantor/cantor_core.hpp"

namespace gcantor {

// --- D sequences -------------------------------------------------------------

class DSequence {
 public:
  enum class Kind { kConstant, kList, kDoubling };

  static DSequence constant(std::uint64_t p);
  /// d_1, d_2, ... cycle through `values`.
  static DSequence list(std::vector<std::uint64_t> values);
  /// d_k = 2^(2^k), so D_k = 2^(2^(k+1) - 2).
  static DSequence doubling();

  Kind kind() const { return kind_; }
  const std::vector<std::uint64_t>& values() const { return values_; }

  /// d_k for k >= 1.
  Integer d(std::size_t k) const;
  /// D_0 = 1, D_k = d_1 ... d_k.
  Integer D(std::size_t k) const;

  /// "const:2", "list:[2,3]", "doubling".
  std::string describe() const;
  static DSequence parse(const std::string& text);

  friend bool operator==(const DSequence& a, const DSequence& b) {
    return a.kind_ == b.kind_ && a.values_ == b.values_;
  }

 private:
  Kind kind_ = Kind::kConstant;
  std::vector<std::uint64_t> values_;
};

/// Largest k with D_k | q.
std::size_t valuation_index(const Integer& q, const DSequence& d);
/// |q|_D = 1 / D_k for the largest k with D_k | q.
Rational d_norm(const Integer& q, const DSequence& d);
/// H(q) = q^2 |q|_D, always an integer (D_k * qbar^2).
Integer height(const Integer& q, const DSequence& d);

// --- Variants ------------------------------------------------------------------

enum class Variant { kProp1, kProp2 };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

/// prop1: log* q * log*(log q); prop2: log*(log q) * log*(log*(log q)).
Enclosure f_at(const Integer& q, Variant v, int bits);
Enclosure f_value(const Integer& q, Variant v, const Rational& eps);

/// The integer factor F(n) / F(n-1): n * floor(log* n) for prop1,
/// floor(log* n * log*(log n)) for prop2.
Integer f_factor(std::size_t n, Variant v);
/// F(n) (1 for n <= 0); cached and thread-safe.
Integer big_F(long n, Variant v);
/// R_n = R * f_factor(n + 1).
Integer level_R(std::size_t n, std::uint64_t R, Variant v);
/// r_{n-1,n}: 7 log^2 R n^2 (log* n)^2 (prop1) or
/// 7 log^2 R (log* n)^2 (log*(log n))^2 (prop2). Zero for n = 0.
Budget littlewood_budget(std::size_t n, std::uint64_t R, Variant v);

// --- Parameters ------------------------------------------------------------------

struct InstanceParams {
  std::uint64_t R = 0;
  Rational c1;
  Rational c;
  Variant variant = Variant::kProp1;
  DSequence d = DSequence::constant(2);
  ClosedInterval root;  // length c1 inside [0, 1]

  /// Root defaults to [0, c1].
  static InstanceParams make(std::uint64_t R, Rational c1, Rational c, Variant v, DSequence d,
                             std::optional<ClosedInterval> root = std::nullopt);
};

struct InequalityCheck {
  std::string name;
  Enclosure lhs;
  Rational bound;
  bool pass = false;
};

struct ParamsCertificate {
  std::vector<InequalityCheck> checks;  // threshold, c1 inequality, c inequality
  Enclosure c4;  // proof-internal constant, diagnostic only
  bool pass = false;
};

/// Decides R > e^12, 2e^2 c1 (log R + 2)/log 2 * R < 1 and
/// c (64R^2(log R+2)/(c1 log 2) + 16eR^2(log R+2)^2/log 2) < 1.
ParamsCertificate validate_params(std::uint64_t R, const Rational& c1, const Rational& c,
                                  Variant v);
ParamsCertificate validate_params(const InstanceParams& p);

// --- Candidates --------------------------------------------------------------------

struct RationalCandidate {
  Integer r;
  Integer q;
  std::size_t k = 0;  // q = D_k * qbar with q not in D_{k+1} Z
  Integer qbar;
  Integer height;     // D_k * qbar^2
  long stratum = 0;   // floor(ln(H / (R^{n-1} F(n-1))))
  Rational outer_radius;  // delta_radius(q, height, p, kOuter), kept from enumeration

  friend bool operator==(const RationalCandidate& a, const RationalCandidate& b) {
    return a.q == b.q && a.r == b.r;
  }
  friend bool operator<(const RationalCandidate& a, const RationalCandidate& b) {
    if (a.q != b.q) return a.q < b.q;
    return a.r < b.r;
  }
};

enum class Rounding { kOuter, kInner };

/// Radius bound for c / (f(q) H(q)): an upper bound for kOuter and a lower
/// bound for kInner, evaluated at `bits` of working precision.
Rational delta_radius(const Integer& q, const Integer& height, const InstanceParams& p,
                      Rounding rounding, int bits = 128);
ClosedInterval delta_interval(const RationalCandidate& cand, const InstanceParams& p,
                              Rounding rounding, int bits = 128);
/// The outer interval from the radius stored at enumeration time.
ClosedInterval outer_delta(const RationalCandidate& cand);

/// [R^{n-1} F(n-1), R^n F(n)): the heights that make up C(n), n >= 1.
std::pair<Integer, Integer> height_window(std::size_t n, const InstanceParams& p);

/// Candidates of C(n) whose outer exclusion interval meets `window`
/// (closed intersection), sorted by (q, r). Non-reduced fractions are
/// enumerated separately since their heights differ.
std::vector<RationalCandidate> enumerate_candidates(std::size_t n, const ClosedInterval& window,
                                                    const InstanceParams& p,
                                                    ExecPolicy policy = ExecPolicy::kSerial);

/// Brute-force reference: every q with H(q) in the window and every r.
std::vector<RationalCandidate> enumerate_candidates_bruteforce(std::size_t n,
                                                               const ClosedInterval& window,
                                                               const InstanceParams& p);

// --- Full mode ---------------------------------------------------------------------

/// Littlewood (I, R, r) schedule: R_n = level_R(n), r_{n-1,n} = budget(n).
CantorSchedule littlewood_schedule(const InstanceParams& p);

/// Removes every candidate child whose closed hull meets the outer
/// exclusion interval of some r/q in C(n) (for every listed instance),
/// charged to stratum n - 1.
RemovalRule littlewood_rule(std::vector<InstanceParams> instances,
                            ExecPolicy policy = ExecPolicy::kSerial);

// --- Witness mode ------------------------------------------------------------------

class NoSurvivor : public std::runtime_error {
 public:
  NoSurvivor(std::size_t level, std::vector<RationalCandidate> offenders);
  std::size_t level;
  std::vector<RationalCandidate> offenders;
};

class BudgetViolation : public std::runtime_error {
 public:
  BudgetViolation(std::size_t level, std::uint64_t removed);
  std::size_t level;
  std::uint64_t removed;
};

struct WitnessLedger {
  std::size_t level = 0;          // n: children at level n + 1 were examined
  ClosedInterval ancestor;        // J_{n-1} (J_0 when n = 0)
  std::uint64_t candidates = 0;   // #C(n) meeting the ancestor window
  std::uint64_t removed_in_ancestor = 0;
  std::uint64_t removed_in_active = 0;
  Enclosure budget;               // r_{n-1,n}, summed over instances
  bool within_budget = true;
  /// Kills per (k, l) stratum inside the ancestor (first instance only).
  std::map<std::pair<std::size_t, long>, std::uint64_t> kills_by_stratum;
};

struct WitnessCertificate {
  std::vector<InstanceParams> instances;  // one, or several for a joint witness
  std::vector<ClosedInterval> chain;      // J_0 ⊃ J_1 ⊃ ... ⊃ J_N
  std::vector<WitnessLedger> ledgers;     // ledgers[n] produced chain[n + 1]
  Integer height_bound;                   // R^{N-1} F(N-1)
  bool certified = false;                 // every instance passed validate_params

  std::size_t depth() const { return chain.empty() ? 0 : chain.size() - 1; }
};

struct WitnessOptions {
  ExecPolicy exec = ExecPolicy::kSerial;
  /// Uncertified runs report budget breaches instead of throwing.
  BudgetPolicy budgets = BudgetPolicy::kEnforce;
};

/// Builds the leftmost-surviving nested chain to `depth`. Instances must
/// share R, variant, c1 and root; budgets are summed across instances.
WitnessCertificate witness(const std::vector<InstanceParams>& instances, std::size_t depth,
                           const WitnessOptions& options = {});
WitnessCertificate witness(const InstanceParams& params, std::size_t depth,
                           const WitnessOptions& options = {});

// --- Verification (independent of the builder) -----------------------------------

struct Violation {
  std::size_t instance = 0;
  Integer r;
  Integer q;
  std::size_t level = 0;
};

struct VerifyReport {
  std::uint64_t checked = 0;  // q values (or candidates) actually examined
  std::uint64_t skipped = 0;  // q with H(q) at or beyond the certified bound
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// For every q <= q_max with H(q) below the certified bound, checks
/// f(q) q |q|_D min_{α ∈ J_N} ||qα|| > c for every instance.
VerifyReport verify_witness(const WitnessCertificate& cert, std::uint64_t q_max,
                            ExecPolicy policy = ExecPolicy::kSerial);

/// Re-enumerates (qbar outer, k inner) every r/q with H(q) < R^{n-1}F(n-1)
/// and checks that chain[n] meets no inner exclusion interval, n = 1..N.
VerifyReport sieve_soundness(const WitnessCertificate& cert,
                             ExecPolicy policy = ExecPolicy::kSerial);

}  // namespace gcantor
