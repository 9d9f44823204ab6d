#include "gcantor/certify.hpp"

#include <algorithm>

namespace gcantor {

namespace {

bool all_exact(const std::vector<std::vector<BudgetEntry>>& columns) {
  for (const auto& col : columns) {
    for (const auto& e : col) {
      if (!e.value.is_exact()) return false;
    }
  }
  return true;
}

Rational two_pow_neg(int log2) {
  Rational x(1);
  mpq_div_2exp(x.get_mpq_t(), x.get_mpq_t(), static_cast<mp_bitcnt_t>(log2));
  return x;
}

// One pass of the recursion at a fixed working precision. Returns false if
// the sign of some term could not be decided at this precision.
bool t_pass(const CantorSchedule& schedule, const std::vector<std::vector<BudgetEntry>>& columns,
            int bits, bool exact, TSequence& out) {
  out.values.clear();
  out.first_nonpositive.reset();
  for (std::size_t n = 0; n < columns.size(); ++n) {
    Enclosure t = Enclosure::point(Rational(schedule.branching(n)));
    for (const auto& entry : columns[n]) {
      Enclosure r = entry.value.enclose(bits);
      const std::size_t k = n - entry.m;
      Enclosure denom = Enclosure::point(Rational(1));
      for (std::size_t i = 1; i <= k; ++i) {
        denom = denom * out.values[n - i];
        if (!exact) denom = round_outward(denom, bits);
      }
      t = t - r / denom;
      if (!exact) t = round_outward(t, bits);
    }
    out.values.push_back(t);
    if (t.lo > 0) continue;
    if (t.hi <= 0) {
      out.first_nonpositive = n;
      return true;
    }
    return false;  // straddles zero
  }
  return true;
}

}  // namespace

DegenerateRecursion::DegenerateRecursion(std::size_t i)
    : std::runtime_error("t-recursion is undefined past the nonpositive term t_" +
                         std::to_string(i)),
      index(i) {}

const Enclosure& TSequence::at(std::size_t index) const {
  if (first_nonpositive && index > *first_nonpositive) throw DegenerateRecursion(*first_nonpositive);
  if (index >= values.size()) throw std::out_of_range("t index beyond the computed depth");
  return values[index];
}

TSequence t_sequence(const CantorSchedule& schedule, std::size_t depth) {
  std::vector<std::vector<BudgetEntry>> columns;
  columns.reserve(depth + 1);
  for (std::size_t n = 0; n <= depth; ++n) columns.push_back(schedule.column(n));
  const bool exact = all_exact(columns);

  TSequence out;
  const Rational cap = two_pow_neg(precision_cap_log2());
  for (int bits = kInitialBits;; bits *= 2) {
    if (t_pass(schedule, columns, bits, exact, out)) return out;
    const Enclosure& last = out.values.back();
    if (exact || last.width() < cap || bits > (1 << 16)) {
      throw UndecidableError(UndecidableError::Kind::kComparison,
                             "sign of t_" + std::to_string(out.values.size() - 1) +
                                 " undecided at the precision cap");
    }
  }
}

NonEmptinessCertificate certify_nonempty(const CantorSchedule& schedule, std::size_t depth) {
  TSequence ts = t_sequence(schedule, depth);
  NonEmptinessCertificate cert;
  cert.t_values = ts.values;
  cert.first_failure = ts.first_nonpositive;
  cert.pass = !ts.first_nonpositive.has_value();
  if (cert.pass) {
    Rational prod(1);
    cert.survivor_lower_bounds.push_back(prod);
    for (const auto& t : ts.values) {
      prod *= t.lo;
      cert.survivor_lower_bounds.push_back(prod);
    }
  }
  return cert;
}

DimensionCertificate check_dimension_condition(const CantorSchedule& schedule, std::size_t depth) {
  DimensionCertificate cert;
  cert.branching_at_least_4 = true;
  cert.pass = true;
  for (std::size_t n = 0; n <= depth; ++n) {
    DimensionConditionRow row;
    row.n = n;
    row.branching = schedule.branching(n);
    row.rhs = Rational(row.branching) / 4;

    const std::vector<BudgetEntry> col = schedule.column(n);
    // Weight of r_{m,n}: prod_{i=1}^{n-m} 4 / R_{n-i}, always exact.
    std::vector<Rational> weights;
    bool exact = true;
    for (const auto& e : col) {
      Rational w(1);
      for (std::size_t i = 1; i <= n - e.m; ++i) w *= Rational(4, schedule.branching(n - i));
      w.canonicalize();
      weights.push_back(w);
      exact = exact && e.value.is_exact();
    }
    Refiner lhs = [&col, &weights](int bits) {
      Enclosure sum = Enclosure::point(Rational(0));
      for (std::size_t i = 0; i < col.size(); ++i) {
        sum = sum + col[i].value.enclose(bits) * Enclosure::point(weights[i]);
      }
      return sum;
    };

    bool ok_sum;
    if (exact) {
      row.lhs = lhs(kInitialBits);
      ok_sum = row.lhs.lo <= row.rhs;
    } else {
      ok_sum = compare_refined(lhs, row.rhs) <= 0;
      row.lhs = round_outward(lhs(2 * kInitialBits), 2 * kInitialBits);
    }
    const bool ok_r = row.branching >= 4;
    row.ok = ok_sum && ok_r;
    cert.branching_at_least_4 = cert.branching_at_least_4 && ok_r;
    if (!row.ok && cert.pass) {
      cert.pass = false;
      cert.first_failure = n;
    }
    cert.rows.push_back(std::move(row));
  }
  return cert;
}

Enclosure one_minus_log_r_2(std::uint64_t r) {
  if (r < 2) throw DomainError("branching below 2");
  if ((r & (r - 1)) == 0) {
    int j = 0;
    while ((std::uint64_t{1} << j) != r) ++j;
    return Enclosure::point(Rational(1) - Rational(1, j));
  }
  Refiner value = [r](int bits) {
    Enclosure ln2 = ln_at(Rational(2), bits);
    Enclosure lnr = ln_at(Rational(r), bits);
    return round_outward(Enclosure::point(Rational(1)) - ln2 / lnr, bits);
  };
  return refine_to_width(value, two_pow_neg(64));
}

DimensionBound dimension_lower_bound(const CantorSchedule& schedule,
                                     const DimensionCertificate& dimension_condition) {
  if (!dimension_condition.pass) {
    throw DomainError("dimension bound requested without a passing dimension-condition certificate");
  }
  DimensionBound out;
  out.horizon = dimension_condition.rows.empty() ? 0 : dimension_condition.rows.back().n;

  std::optional<Enclosure> minimum;
  std::uint64_t min_r = 0;
  for (const auto& row : dimension_condition.rows) {
    if (min_r != 0 && row.branching >= min_r) continue;  // term is monotone in R
    min_r = row.branching;
    minimum = one_minus_log_r_2(row.branching);
  }
  out.horizon_minimum = minimum.value_or(Enclosure::point(Rational(0)));

  bool monotone = schedule.branching_nondecreasing_from(0);
  if (!monotone && schedule.is_explicit()) {
    // Past the explicit list the branching is constant.
    monotone = out.horizon + 1 >= schedule.explicit_data().branching.size();
  }
  if (monotone) {
    out.rigorous = true;
    out.bound = one_minus_log_r_2(schedule.branching(out.horizon));
    out.note = "rigorous: branching is nondecreasing past the horizon";
  } else {
    out.rigorous = false;
    out.bound = out.horizon_minimum;
    out.note = "empirical liminf: minimum over the checked horizon";
  }
  return out;
}

}  // namespace gcantor
