#pragma once

// Exact rational arithmetic and rigorous two-sided enclosures.
//
// Every comparison the engine makes is either exact (GMP rationals) or
// decided from an enclosure [lo, hi] that provably contains the real value.
// Irrational quantities (logarithms, e) come from MPFR evaluated with
// directed rounding, so lo is always a lower bound and hi an upper bound.

#include <gmpxx.h>

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gcantor {

using Integer = mpz_class;
using Rational = mpq_class;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an enclosure still straddles the decision point after the
/// precision cap has been reached.
class UndecidableError : public std::runtime_error {
 public:
  enum class Kind { kFloor, kComparison };

  UndecidableError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Builds num/den in lowest terms with a positive denominator.
Rational make_rational(const Integer& num, const Integer& den);

/// Accepts "a/b", integers, decimals ("0.125", "-3.5e-4") and powers
/// ("2^-27", "-3^4"). Throws DomainError on malformed input.
Rational parse_rational(std::string_view text);

/// "num/den", or "num" when the denominator is 1.
std::string to_string(const Rational& x);

Integer floor_rational(const Rational& x);
Integer ceil_rational(const Rational& x);
Rational pow_rational(const Rational& base, long exponent);
double to_double(const Rational& x);

struct Enclosure {
  Rational lo;
  Rational hi;

  Enclosure() = default;
  Enclosure(Rational lower, Rational upper);

  static Enclosure point(const Rational& x) { return Enclosure(x, x); }

  Rational width() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool is_point() const { return lo == hi; }
  double midpoint() const;
};

Enclosure operator+(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a, const Enclosure& b);
Enclosure operator*(const Enclosure& a, const Enclosure& b);
/// Requires b to exclude zero.
Enclosure operator/(const Enclosure& a, const Enclosure& b);
Enclosure hull(const Enclosure& a, const Enclosure& b);
/// Rounds both endpoints outward to `bits` significant bits, keeping
/// enclosure arithmetic from accumulating huge denominators.
Enclosure round_outward(const Enclosure& a, int bits);
Enclosure square(const Enclosure& a);

struct ClosedInterval {
  Rational left;
  Rational right;

  ClosedInterval() = default;
  ClosedInterval(Rational l, Rational r);

  Rational length() const { return right - left; }
  bool contains(const Rational& x) const { return left <= x && x <= right; }
  bool contains(const ClosedInterval& other) const {
    return left <= other.left && other.right <= right;
  }
  /// Closed-set intersection; sharing an endpoint counts.
  bool meets(const ClosedInterval& other) const {
    return left <= other.right && other.left <= right;
  }
  /// Intersection of positive length.
  bool overlaps_interior(const ClosedInterval& other) const {
    return left < other.right && other.left < right;
  }

  friend bool operator==(const ClosedInterval& a, const ClosedInterval& b) {
    return a.left == b.left && a.right == b.right;
  }
  friend bool operator<(const ClosedInterval& a, const ClosedInterval& b) {
    if (a.left != b.left) return a.left < b.left;
    return a.right < b.right;
  }
};

// --- Precision control ------------------------------------------------------

inline constexpr int kInitialBits = 64;

/// log2 of the smallest enclosure width the refinement loops will try
/// before declaring a decision undecidable. Defaults to 256; overridable
/// through the CANTOR_PRECISION_CAP environment variable or at runtime.
int precision_cap_log2();
void set_precision_cap_log2(int log2_width);

/// A procedure producing an enclosure of a fixed real at a given working
/// precision (in bits). Higher precision must not widen the enclosure
/// asymptotically.
using Refiner = std::function<Enclosure(int bits)>;

// --- Rigorous elementary functions ------------------------------------------

Enclosure ln_at(const Rational& x, int bits);
/// Image of [x.lo, x.hi] under ln; requires x.lo > 0.
Enclosure ln_at(const Enclosure& x, int bits);
/// log* x = 1 for x < e and ln x otherwise; equals max(1, ln x) for x > 0.
Enclosure log_star_at(const Rational& x, int bits);
Enclosure log_star_at(const Enclosure& x, int bits);
Enclosure exp_at(const Rational& x, int bits);
Enclosure euler_at(int bits);

/// lo <= ln x <= hi with hi - lo <= eps.
Enclosure log_enclosure(const Rational& x, const Rational& eps);
/// Encloses log* x with width <= eps; x must be non-negative.
Enclosure log_star_enclosure(const Rational& x, const Rational& eps);

Enclosure refine_to_width(const Refiner& value, const Rational& eps);

/// floor of the refined value; throws UndecidableError(kFloor) if the
/// enclosure still straddles an integer at the precision cap.
Integer floor_of_enclosure(const Refiner& value);

/// Sign of (value - bound): -1 or +1 once decided, 0 only when the value is
/// exactly the bound (a zero-width enclosure at it). Throws
/// UndecidableError(kComparison) at the precision cap.
int compare_refined(const Refiner& value, const Rational& bound);

}  // namespace gcantor
