#include "gcantor/littlewood.hpp"

#include <algorithm>
#include <array>
#include <mutex>
#include <sstream>

namespace gcantor {

// --- D sequences -------------------------------------------------------------

DSequence DSequence::constant(std::uint64_t p) {
  if (p < 2) throw DomainError("D sequence terms must be at least 2");
  DSequence s;
  s.kind_ = Kind::kConstant;
  s.values_ = {p};
  return s;
}

DSequence DSequence::list(std::vector<std::uint64_t> values) {
  if (values.empty()) throw DomainError("empty D list");
  for (auto v : values) {
    if (v < 2) throw DomainError("D sequence terms must be at least 2");
  }
  DSequence s;
  s.kind_ = Kind::kList;
  s.values_ = std::move(values);
  return s;
}

DSequence DSequence::doubling() {
  DSequence s;
  s.kind_ = Kind::kDoubling;
  return s;
}

Integer DSequence::d(std::size_t k) const {
  if (k == 0) throw DomainError("d_k is defined for k >= 1");
  switch (kind_) {
    case Kind::kConstant:
      return Integer(static_cast<unsigned long>(values_[0]));
    case Kind::kList:
      return Integer(static_cast<unsigned long>(values_[(k - 1) % values_.size()]));
    case Kind::kDoubling: {
      if (k > 40) throw DomainError("doubling D term too large");
      Integer out;
      mpz_ui_pow_ui(out.get_mpz_t(), 2, 1UL << k);
      return out;
    }
  }
  return Integer(0);
}

Integer DSequence::D(std::size_t k) const {
  if (kind_ == Kind::kConstant) {
    Integer out;
    mpz_ui_pow_ui(out.get_mpz_t(), values_[0], k);
    return out;
  }
  if (kind_ == Kind::kDoubling) {
    if (k > 40) throw DomainError("doubling D product too large");
    Integer out;
    mpz_ui_pow_ui(out.get_mpz_t(), 2, (1UL << (k + 1)) - 2);
    return out;
  }
  Integer out(1);
  for (std::size_t i = 1; i <= k; ++i) out *= d(i);
  return out;
}

std::string DSequence::describe() const {
  switch (kind_) {
    case Kind::kConstant:
      return "const:" + std::to_string(values_[0]);
    case Kind::kList: {
      std::string s = "list:[";
      for (std::size_t i = 0; i < values_.size(); ++i) {
        s += (i ? "," : "") + std::to_string(values_[i]);
      }
      return s + "]";
    }
    case Kind::kDoubling:
      return "doubling";
  }
  return "";
}

DSequence DSequence::parse(const std::string& text) {
  auto bad = [&] { return DomainError("unrecognised D sequence '" + text + "'"); };
  if (text == "doubling") return doubling();
  if (text.rfind("const:", 0) == 0) {
    const std::string v = text.substr(6);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) throw bad();
    return constant(std::stoull(v));
  }
  if (text.rfind("list:", 0) == 0) {
    std::string body = text.substr(5);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') throw bad();
    body = body.substr(1, body.size() - 2);
    std::vector<std::uint64_t> values;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty() || item.find_first_not_of("0123456789 ") != std::string::npos) throw bad();
      values.push_back(std::stoull(item));
    }
    return list(std::move(values));
  }
  throw bad();
}

std::size_t valuation_index(const Integer& q, const DSequence& d) {
  if (q <= 0) throw DomainError("|q|_D needs q >= 1");
  Integer rest = q;
  std::size_t k = 0;
  for (;;) {
    Integer next = d.d(k + 1);
    if (!mpz_divisible_p(rest.get_mpz_t(), next.get_mpz_t())) return k;
    rest /= next;
    ++k;
  }
}

Rational d_norm(const Integer& q, const DSequence& d) {
  return make_rational(Integer(1), d.D(valuation_index(q, d)));
}

Integer height(const Integer& q, const DSequence& d) {
  // q^2 / D_k with D_k | q.
  return q * (q / d.D(valuation_index(q, d)));
}

// --- Variants ------------------------------------------------------------------

std::string to_string(Variant v) { return v == Variant::kProp1 ? "prop1" : "prop2"; }

Variant parse_variant(const std::string& text) {
  if (text == "prop1") return Variant::kProp1;
  if (text == "prop2") return Variant::kProp2;
  throw DomainError("unknown variant '" + text + "'");
}

Enclosure f_at(const Integer& q, Variant v, int bits) {
  if (q < 1) throw DomainError("f(q) needs q >= 1");
  const Rational qr(q);
  if (q < 3) return Enclosure::point(Rational(1));  // ln q < 1, every factor is 1
  const Enclosure lnq = ln_at(qr, bits);
  Enclosure out;
  if (v == Variant::kProp1) {
    out = lnq * log_star_at(lnq, bits);  // q >= 3 > e
  } else {
    const Enclosure a = log_star_at(lnq, bits);
    out = a * log_star_at(a, bits);
  }
  return round_outward(out, bits);
}

Enclosure f_value(const Integer& q, Variant v, const Rational& eps) {
  return refine_to_width([&](int bits) { return f_at(q, v, bits); }, eps);
}

Integer f_factor(std::size_t n, Variant v) {
  if (n == 0) throw DomainError("F factors start at 1");
  const Rational x(static_cast<unsigned long>(n));
  if (v == Variant::kProp1) {
    return Integer(static_cast<unsigned long>(n)) *
           floor_of_enclosure([&](int bits) { return log_star_at(x, bits); });
  }
  return floor_of_enclosure([&](int bits) {
    return log_star_at(x, bits) * log_star_at(ln_at(x, bits), bits);
  });
}

Integer big_F(long n, Variant v) {
  static std::mutex mu;
  static std::array<std::vector<Integer>, 2> cache{std::vector<Integer>{Integer(1)},
                                                   std::vector<Integer>{Integer(1)}};
  if (n <= 0) return Integer(1);
  std::lock_guard<std::mutex> lock(mu);
  auto& c = cache[v == Variant::kProp1 ? 0 : 1];
  while (c.size() <= static_cast<std::size_t>(n)) {
    c.push_back(c.back() * f_factor(c.size(), v));
  }
  return c[static_cast<std::size_t>(n)];
}

Integer level_R(std::size_t n, std::uint64_t R, Variant v) {
  return Integer(static_cast<unsigned long>(R)) * f_factor(n + 1, v);
}

Budget littlewood_budget(std::size_t n, std::uint64_t R, Variant v) {
  if (n == 0) return Budget(Rational(0));
  return Budget(Refiner([n, R, v](int bits) {
    const Enclosure lnR = ln_at(Rational(static_cast<unsigned long>(R)), bits);
    const Rational nr(static_cast<unsigned long>(n));
    Enclosure value = Enclosure::point(Rational(7)) * square(lnR);
    if (v == Variant::kProp1) {
      value = value * Enclosure::point(nr * nr) * square(log_star_at(nr, bits));
    } else {
      value = value * square(log_star_at(nr, bits)) * square(log_star_at(ln_at(nr, bits), bits));
    }
    return round_outward(value, bits);
  }));
}

// --- Parameters ------------------------------------------------------------------

InstanceParams InstanceParams::make(std::uint64_t R, Rational c1, Rational c, Variant v,
                                    DSequence d, std::optional<ClosedInterval> root) {
  if (R < 2) throw DomainError("R must be at least 2");
  if (c1 <= 0 || c1 > 1) throw DomainError("c1 must lie in (0, 1]");
  if (c <= 0) throw DomainError("c must be strictly positive");
  InstanceParams p;
  p.R = R;
  p.c1 = std::move(c1);
  p.c = std::move(c);
  p.variant = v;
  p.d = std::move(d);
  p.root = root ? *root : ClosedInterval(Rational(0), p.c1);
  if (p.root.length() != p.c1) throw DomainError("root length must equal c1");
  if (p.root.left < 0 || p.root.right > 1) throw DomainError("root must lie inside [0, 1]");
  return p;
}

ParamsCertificate validate_params(std::uint64_t R, const Rational& c1, const Rational& c,
                                  Variant /*v*/) {
  if (R < 2) throw DomainError("R must be at least 2");
  if (c1 <= 0) throw DomainError("c1 must be strictly positive");
  if (c <= 0) throw DomainError("c must be strictly positive");
  const Rational Rr(static_cast<unsigned long>(R));

  auto e12 = [](int bits) { return exp_at(Rational(12), bits); };
  auto ineq_c1 = [Rr, c1](int bits) {
    Enclosure e = euler_at(bits);
    Enclosure lnR = ln_at(Rr, bits), ln2 = ln_at(Rational(2), bits);
    Enclosure v = Enclosure::point(2 * c1 * Rr) * square(e) *
                  (lnR + Enclosure::point(Rational(2))) / ln2;
    return round_outward(v, bits);
  };
  auto ineq_c = [Rr, c1, c](int bits) {
    Enclosure e = euler_at(bits);
    Enclosure lnR = ln_at(Rr, bits), ln2 = ln_at(Rational(2), bits);
    Enclosure lr2 = lnR + Enclosure::point(Rational(2));
    Enclosure t1 = Enclosure::point(64 * Rr * Rr / c1) * lr2 / ln2;
    Enclosure t2 = Enclosure::point(16 * Rr * Rr) * e * square(lr2) / ln2;
    return round_outward(Enclosure::point(c) * (t1 + t2), bits);
  };

  ParamsCertificate cert;
  auto add = [&](std::string name, const Refiner& lhs, const Rational& bound) {
    InequalityCheck chk;
    chk.name = std::move(name);
    chk.bound = bound;
    chk.pass = compare_refined(lhs, bound) < 0;
    chk.lhs = lhs(128);
    cert.checks.push_back(std::move(chk));
  };
  add("e^12 < R", e12, Rr);
  add("2e^2 c1 (log R + 2) / log 2 * R < 1", ineq_c1, Rational(1));
  add("c (64R^2(log R + 2)/(c1 log 2) + 16eR^2(log R + 2)^2/log 2) < 1", ineq_c, Rational(1));

  {
    const int bits = 128;
    Enclosure e = euler_at(bits);
    Enclosure lr2 = ln_at(Rr, bits) + Enclosure::point(Rational(2));
    Enclosure c4 = Enclosure::point(2 * c1 * Rr) * square(e) +
                   Enclosure::point(64 * c / c1 * Rr * Rr) +
                   lr2 * (Enclosure::point(16 * c * Rr * Rr) * e + Enclosure::point(Rational(4)));
    cert.c4 = round_outward(c4, bits);
  }
  cert.pass = std::all_of(cert.checks.begin(), cert.checks.end(),
                          [](const InequalityCheck& c) { return c.pass; });
  return cert;
}

ParamsCertificate validate_params(const InstanceParams& p) {
  return validate_params(p.R, p.c1, p.c, p.variant);
}

// --- Exclusion intervals -----------------------------------------------------------

Rational delta_radius(const Integer& q, const Integer& h, const InstanceParams& p,
                      Rounding rounding, int bits) {
  const Enclosure f = f_at(q, p.variant, bits);
  const Rational& fb = rounding == Rounding::kOuter ? f.lo : f.hi;
  return p.c / (fb * Rational(h));
}

ClosedInterval delta_interval(const RationalCandidate& cand, const InstanceParams& p,
                              Rounding rounding, int bits) {
  const Rational rho = delta_radius(cand.q, cand.height, p, rounding, bits);
  const Rational center = make_rational(cand.r, cand.q);
  return ClosedInterval(center - rho, center + rho);
}

ClosedInterval outer_delta(const RationalCandidate& cand) {
  const Rational center = make_rational(cand.r, cand.q);
  return ClosedInterval(center - cand.outer_radius, center + cand.outer_radius);
}

std::pair<Integer, Integer> height_window(std::size_t n, const InstanceParams& p) {
  if (n == 0) throw DomainError("C(n) is defined for n >= 1");
  Integer rpow;
  mpz_ui_pow_ui(rpow.get_mpz_t(), p.R, n - 1);
  Integer lower = rpow * big_F(static_cast<long>(n) - 1, p.variant);
  Integer upper = rpow * Integer(static_cast<unsigned long>(p.R)) *
                  big_F(static_cast<long>(n), p.variant);
  return {lower, upper};
}

// --- Full mode ---------------------------------------------------------------------

CantorSchedule littlewood_schedule(const InstanceParams& p) {
  const std::uint64_t R = p.R;
  const Variant v = p.variant;
  auto branching = [R, v](std::size_t n) -> std::uint64_t {
    Integer rn = level_R(n, R, v);
    if (!rn.fits_ulong_p()) throw DomainError("R_n does not fit in 64 bits");
    return rn.get_ui();
  };
  auto column = [R, v](std::size_t n) -> std::vector<BudgetEntry> {
    if (n == 0) return {};
    return {BudgetEntry{n - 1, littlewood_budget(n, R, v)}};
  };
  return CantorSchedule::generated(p.root, branching, column, true,
                                   "littlewood(" + to_string(v) + ",R=" + std::to_string(R) + ")");
}

RemovalRule littlewood_rule(std::vector<InstanceParams> instances, ExecPolicy policy) {
  if (instances.empty()) throw DomainError("littlewood_rule needs at least one instance");
  return [instances = std::move(instances), policy](const RemovalContext& ctx) {
    std::vector<Deletion> out;
    const std::size_t n = ctx.level;
    if (n == 0 || ctx.candidates.size() == 0) return out;  // C(0) is empty: H(q) >= 1

    const auto& parents = ctx.history[n].intervals;
    const ClosedInterval hull(parents.front().left, parents.back().right);
    const auto& cells = ctx.candidates.intervals;
    std::vector<char> dead(cells.size(), 0);

    for (const auto& inst : instances) {
      for (const auto& cand : enumerate_candidates(n, hull, inst, policy)) {
        const ClosedInterval delta = outer_delta(cand);
        // First cell whose right endpoint reaches the exclusion interval.
        auto it = std::lower_bound(cells.begin(), cells.end(), delta.left,
                                   [](const ClosedInterval& c, const Rational& x) {
                                     return c.right < x;
                                   });
        for (; it != cells.end() && it->left <= delta.right; ++it) {
          dead[static_cast<std::size_t>(it - cells.begin())] = 1;
        }
      }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (dead[i]) out.push_back({i, n - 1});
    }
    return out;
  };
}

NoSurvivor::NoSurvivor(std::size_t lvl, std::vector<RationalCandidate> offs)
    : std::runtime_error("no surviving child at level " + std::to_string(lvl + 1)),
      level(lvl),
      offenders(std::move(offs)) {}

BudgetViolation::BudgetViolation(std::size_t lvl, std::uint64_t rem)
    : std::runtime_error("removal count " + std::to_string(rem) + " exceeds the budget at level " +
                         std::to_string(lvl)),
      level(lvl),
      removed(rem) {}

}  // namespace gcantor
