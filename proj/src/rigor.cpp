#include "gcantor/rigor.hpp"

#include <mpfr.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace gcantor {

namespace {

// Refinement never goes beyond this many bits even if the width target is
// not met (a refiner that does not tighten would otherwise spin forever).
constexpr int kMaxBits = 1 << 16;

int initial_cap() {
  if (const char* env = std::getenv("CANTOR_PRECISION_CAP")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 256;
}

std::atomic<int>& cap_storage() {
  static std::atomic<int> cap{initial_cap()};
  return cap;
}

class Mpfr {
 public:
  explicit Mpfr(int bits) { mpfr_init2(v_, bits); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;

  mpfr_ptr get() { return v_; }

  Rational to_rational() const {
    if (!mpfr_number_p(v_)) throw DomainError("non-finite MPFR value");
    if (mpfr_zero_p(v_)) return Rational(0);
    Integer mant;
    mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), v_);
    Rational out(mant);
    if (e >= 0) {
      mpq_mul_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    } else {
      mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    }
    return out;
  }

 private:
  mpfr_t v_;
};

bool width_below_cap(const Enclosure& e) {
  Rational cap(1);
  mpq_div_2exp(cap.get_mpq_t(), cap.get_mpq_t(), precision_cap_log2());
  return e.width() < cap;
}

Rational min4(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
  return std::min({a, b, c, d});
}
Rational max4(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
  return std::max({a, b, c, d});
}

bool parse_integer(std::string_view s, Integer& out) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (std::size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
  }
  std::string digits(s.substr(i));
  out = Integer(digits, 10);
  if (s[0] == '-') out = -out;
  return true;
}

}  // namespace

Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw DomainError("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  auto fail = [&]() -> DomainError {
    return DomainError("malformed rational: '" + std::string(text) + "'");
  };
  if (s.empty()) throw fail();

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Integer num, den;
    if (!parse_integer(s.substr(0, slash), num) || !parse_integer(s.substr(slash + 1), den)) {
      throw fail();
    }
    if (den == 0) throw DomainError("zero denominator in '" + std::string(text) + "'");
    return make_rational(num, den);
  }

  if (auto caret = s.find('^'); caret != std::string_view::npos) {
    bool negative = s[0] == '-';
    std::string_view base_text = s.substr(negative ? 1 : 0, caret - (negative ? 1 : 0));
    Integer base, exponent;
    if (!parse_integer(base_text, base) || !parse_integer(s.substr(caret + 1), exponent)) {
      throw fail();
    }
    if (!exponent.fits_slong_p()) throw fail();
    if (base == 0 && exponent < 0) throw DomainError("zero to a negative power");
    Rational r = pow_rational(Rational(base), exponent.get_si());
    return negative ? Rational(-r) : r;
  }

  // Decimal with optional exponent.
  std::size_t epos = s.find_first_of("eE");
  std::string_view mantissa = s.substr(0, epos);
  long exp10 = 0;
  if (epos != std::string_view::npos) {
    Integer e;
    if (!parse_integer(s.substr(epos + 1), e) || !e.fits_slong_p()) throw fail();
    exp10 = e.get_si();
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  for (char ch : mantissa) {
    if (ch == '.') {
      if (seen_point) throw fail();
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      if (seen_point) ++frac_digits;
    } else {
      throw fail();
    }
  }
  if (digits.empty()) throw fail();
  Rational r(Integer(digits, 10));
  r *= pow_rational(Rational(10), exp10 - frac_digits);
  return negative ? Rational(-r) : r;
}

std::string to_string(const Rational& x) { return x.get_str(10); }

Integer floor_rational(const Rational& x) {
  Integer out;
  mpz_fdiv_q(out.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return out;
}

Integer ceil_rational(const Rational& x) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return out;
}

Rational pow_rational(const Rational& base, long exponent) {
  if (exponent == 0) return Rational(1);
  if (base == 0) {
    if (exponent < 0) throw DomainError("zero to a negative power");
    return Rational(0);
  }
  unsigned long e = exponent < 0 ? static_cast<unsigned long>(-exponent)
                                 : static_cast<unsigned long>(exponent);
  Integer num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  return exponent < 0 ? make_rational(den, num) : make_rational(num, den);
}

double to_double(const Rational& x) { return x.get_d(); }

Enclosure::Enclosure(Rational lower, Rational upper) : lo(std::move(lower)), hi(std::move(upper)) {
  if (hi < lo) throw DomainError("enclosure with lo > hi");
}

double Enclosure::midpoint() const { return Rational((lo + hi) / 2).get_d(); }

Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  return Enclosure(a.lo + b.lo, a.hi + b.hi);
}

Enclosure operator-(const Enclosure& a, const Enclosure& b) {
  return Enclosure(a.lo - b.hi, a.hi - b.lo);
}

Enclosure operator*(const Enclosure& a, const Enclosure& b) {
  Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return Enclosure(min4(p1, p2, p3, p4), max4(p1, p2, p3, p4));
}

Enclosure operator/(const Enclosure& a, const Enclosure& b) {
  if (b.lo <= 0 && b.hi >= 0) throw DomainError("division by an enclosure containing zero");
  Rational inv_lo = 1 / b.hi;
  Rational inv_hi = 1 / b.lo;
  return a * Enclosure(inv_lo, inv_hi);
}

Enclosure hull(const Enclosure& a, const Enclosure& b) {
  return Enclosure(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

Enclosure round_outward(const Enclosure& a, int bits) {
  if (a.is_point() && a.lo.get_den() == 1) return a;
  Mpfr lo(bits), hi(bits);
  mpfr_set_q(lo.get(), a.lo.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi.get(), a.hi.get_mpq_t(), MPFR_RNDU);
  return Enclosure(lo.to_rational(), hi.to_rational());
}

Enclosure square(const Enclosure& a) {
  if (a.lo >= 0) return Enclosure(a.lo * a.lo, a.hi * a.hi);
  if (a.hi <= 0) return Enclosure(a.hi * a.hi, a.lo * a.lo);
  return Enclosure(Rational(0), std::max(a.lo * a.lo, a.hi * a.hi));
}

ClosedInterval::ClosedInterval(Rational l, Rational r) : left(std::move(l)), right(std::move(r)) {
  if (right < left) throw DomainError("interval with left > right");
}

int precision_cap_log2() { return cap_storage().load(); }

void set_precision_cap_log2(int log2_width) {
  if (log2_width <= 0) throw DomainError("precision cap must be positive");
  cap_storage().store(log2_width);
}

namespace {

// One directed-rounding bound on ln x.
Rational ln_bound(const Rational& x, int bits, mpfr_rnd_t rnd) {
  Mpfr v(bits);
  mpfr_set_q(v.get(), x.get_mpq_t(), rnd);
  mpfr_log(v.get(), v.get(), rnd);
  return v.to_rational();
}

}  // namespace

Enclosure ln_at(const Rational& x, int bits) {
  if (x <= 0) throw DomainError("ln of a non-positive number");
  if (x == 1) return Enclosure::point(Rational(0));
  Mpfr lo(bits);
  if (mpfr_set_q(lo.get(), x.get_mpq_t(), MPFR_RNDD) == 0) {
    // x is exact, and ln x is irrational for rational x != 1, so the
    // correctly rounded-down result is inexact and its successor bounds it.
    mpfr_log(lo.get(), lo.get(), MPFR_RNDD);
    Rational l = lo.to_rational();
    mpfr_nextabove(lo.get());
    return Enclosure(std::move(l), lo.to_rational());
  }
  return Enclosure(ln_bound(x, bits, MPFR_RNDD), ln_bound(x, bits, MPFR_RNDU));
}

Enclosure ln_at(const Enclosure& x, int bits) {
  if (x.lo <= 0) throw DomainError("ln of an enclosure reaching zero");
  if (x.is_point()) return ln_at(x.lo, bits);
  return Enclosure(ln_bound(x.lo, bits, MPFR_RNDD), ln_bound(x.hi, bits, MPFR_RNDU));
}

Enclosure log_star_at(const Rational& x, int bits) {
  if (x < 2) return Enclosure::point(Rational(1));
  const Enclosure l = ln_at(x, bits);
  const Rational one(1);
  return Enclosure(std::max(one, l.lo), std::max(one, l.hi));
}

Enclosure log_star_at(const Enclosure& x, int bits) {
  if (x.is_point()) return log_star_at(x.lo, bits);
  // log* is continuous and nondecreasing, so the image of [lo, hi] is
  // [log* lo, log* hi]; max(1, ln) absorbs the branch at e.
  const Rational one(1);
  const Rational lower = x.lo < 2 ? one : std::max(one, ln_bound(x.lo, bits, MPFR_RNDD));
  const Rational upper = x.hi < 2 ? one : std::max(one, ln_bound(x.hi, bits, MPFR_RNDU));
  return Enclosure(lower, upper);
}

Enclosure exp_at(const Rational& x, int bits) {
  if (x == 0) return Enclosure::point(Rational(1));
  Mpfr lo(bits), hi(bits);
  mpfr_set_q(lo.get(), x.get_mpq_t(), MPFR_RNDD);
  mpfr_exp(lo.get(), lo.get(), MPFR_RNDD);
  mpfr_set_q(hi.get(), x.get_mpq_t(), MPFR_RNDU);
  mpfr_exp(hi.get(), hi.get(), MPFR_RNDU);
  return Enclosure(lo.to_rational(), hi.to_rational());
}

Enclosure euler_at(int bits) { return exp_at(Rational(1), bits); }

Enclosure refine_to_width(const Refiner& value, const Rational& eps) {
  if (eps <= 0) throw DomainError("eps must be positive");
  for (int bits = kInitialBits; bits <= kMaxBits; bits *= 2) {
    Enclosure e = value(bits);
    if (e.width() <= eps) return e;
  }
  throw UndecidableError(UndecidableError::Kind::kComparison,
                         "enclosure did not reach the requested width");
}

Enclosure log_enclosure(const Rational& x, const Rational& eps) {
  if (x <= 0) throw DomainError("log_enclosure: x must be positive");
  if (eps <= 0) throw DomainError("log_enclosure: eps must be positive");
  return refine_to_width([&](int bits) { return ln_at(x, bits); }, eps);
}

Enclosure log_star_enclosure(const Rational& x, const Rational& eps) {
  if (x < 0) throw DomainError("log_star_enclosure: x must be non-negative");
  if (eps <= 0) throw DomainError("log_star_enclosure: eps must be positive");
  return refine_to_width([&](int bits) { return log_star_at(x, bits); }, eps);
}

Integer floor_of_enclosure(const Refiner& value) {
  for (int bits = kInitialBits; bits <= kMaxBits; bits *= 2) {
    Enclosure e = value(bits);
    Integer lo = floor_rational(e.lo);
    // hi < lo + 1 means the enclosure sits inside [lo, lo + 1).
    if (e.hi < Rational(lo + 1)) return lo;
    if (width_below_cap(e)) break;
  }
  throw UndecidableError(UndecidableError::Kind::kFloor,
                         "floor undecidable at the precision cap");
}

int compare_refined(const Refiner& value, const Rational& bound) {
  for (int bits = kInitialBits; bits <= kMaxBits; bits *= 2) {
    Enclosure e = value(bits);
    if (e.hi < bound) return -1;
    if (e.lo > bound) return 1;
    if (e.is_point()) return 0;  // lo == hi == bound
    if (width_below_cap(e)) break;
  }
  std::ostringstream msg;
  msg << "comparison against " << to_string(bound) << " undecidable at the precision cap";
  throw UndecidableError(UndecidableError::Kind::kComparison, msg.str());
}

}  // namespace gcantor
