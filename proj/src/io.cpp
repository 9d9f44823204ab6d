#include "gcantor/io.hpp"

#include <fstream>
#include <sstream>

namespace gcantor {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string path(const std::string& where, const std::string& key) { return where + "." + key; }
std::string path(const std::string& where, std::size_t i) {
  return where + "[" + std::to_string(i) + "]";
}

std::uint64_t uint_from_json(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return j.get<std::uint64_t>();
  if (j.is_string()) {
    try {
      Rational r = parse_rational(j.get<std::string>());
      if (r.get_den() == 1 && r >= 0 && r.get_num().fits_ulong_p()) return r.get_num().get_ui();
    } catch (const DomainError&) {
    }
  }
  fail(where, "expected a non-negative integer");
}

Integer integer_from_json(const Json& j, const std::string& where) {
  Rational r = rational_from_json(j, where);
  if (r.get_den() != 1) fail(where, "expected an integer");
  return r.get_num();
}

Json integer_json(const Integer& x) { return x.get_str(); }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

Json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), file);
}

void write_json_file(const std::string& file, const Json& value) {
  std::ofstream out(file);
  if (!out) throw ParseError(file + ": cannot write");
  out << value.dump(2) << '\n';
}

// --- Scalars -----------------------------------------------------------------------

Json to_json(const Rational& x) {
  return Json{{"num", x.get_num().get_str()}, {"den", x.get_den().get_str()}};
}

Rational rational_from_json(const Json& j, const std::string& where) {
  try {
    if (j.is_object()) {
      const Json& num = field(j, "num", where);
      const Json& den = field(j, "den", where);
      auto text = [&](const Json& v, const std::string& w) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return v.dump();
        fail(w, "expected an integer string");
      };
      Integer n, d;
      if (n.set_str(text(num, path(where, "num")), 10) != 0) fail(where, "bad numerator");
      if (d.set_str(text(den, path(where, "den")), 10) != 0) fail(where, "bad denominator");
      if (d == 0) fail(where, "zero denominator");
      return make_rational(n, d);
    }
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return parse_rational(j.dump());
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  fail(where, "expected a rational ({num, den}, a string or an integer)");
}

Json to_json(const Enclosure& e) { return Json{{"lo", to_json(e.lo)}, {"hi", to_json(e.hi)}}; }

Enclosure enclosure_from_json(const Json& j, const std::string& where) {
  Rational lo = rational_from_json(field(j, "lo", where), path(where, "lo"));
  Rational hi = rational_from_json(field(j, "hi", where), path(where, "hi"));
  if (lo > hi) fail(where, "lo exceeds hi");
  return Enclosure(lo, hi);
}

Json to_json(const ClosedInterval& iv) {
  return Json{{"left", to_json(iv.left)}, {"right", to_json(iv.right)}};
}

ClosedInterval interval_from_json(const Json& j, const std::string& where) {
  Rational l = rational_from_json(field(j, "left", where), path(where, "left"));
  Rational r = rational_from_json(field(j, "right", where), path(where, "right"));
  if (l > r) fail(where, "left exceeds right");
  return ClosedInterval(l, r);
}

// --- Schedules and parameters ------------------------------------------------------

Json to_json(const InstanceParams& p) {
  return Json{{"R", p.R},
              {"c1", to_json(p.c1)},
              {"c", to_json(p.c)},
              {"variant", to_string(p.variant)},
              {"d", p.d.describe()},
              {"root", to_json(p.root)}};
}

InstanceParams params_from_json(const Json& j, const std::string& where) {
  const std::uint64_t R = uint_from_json(field(j, "R", where), path(where, "R"));
  Rational c1 = rational_from_json(field(j, "c1", where), path(where, "c1"));
  Rational c = rational_from_json(field(j, "c", where), path(where, "c"));
  Variant v = Variant::kProp1;
  DSequence d = DSequence::constant(2);
  std::optional<ClosedInterval> root;
  try {
    if (j.contains("variant")) v = parse_variant(j["variant"].get<std::string>());
    if (j.contains("d")) d = DSequence::parse(j["d"].get<std::string>());
    if (j.contains("root")) root = interval_from_json(j["root"], path(where, "root"));
    return InstanceParams::make(R, c1, c, v, d, root);
  } catch (const DomainError& e) {
    fail(where, e.what());
  } catch (const nlohmann::json::exception& e) {
    fail(where, e.what());
  }
}

Json schedule_to_json(const CantorSchedule& s) {
  if (!s.is_explicit()) {
    throw DomainError("only explicit schedules serialize; generated ones are described by "
                      "their parameters (" + s.label() + ")");
  }
  const auto& data = s.explicit_data();
  Json budgets = Json::array();
  for (const auto& [key, value] : data.entries) {
    budgets.push_back(Json{{"m", key.first}, {"n", key.second}, {"value", to_json(value)}});
  }
  Json diagonals = Json::array();
  for (const auto& d : data.diagonals) {
    diagonals.push_back(Json{{"offset", d.offset}, {"value", to_json(d.value)}});
  }
  return Json{{"root", to_json(s.root())},
              {"branching", data.branching},
              {"budgets", budgets},
              {"diagonals", diagonals}};
}

CantorSchedule schedule_from_json(const Json& j) {
  if (!j.is_object()) fail("$", "expected a schedule object");
  if (j.contains("littlewood")) {
    const Json& lw = j["littlewood"];
    std::vector<CantorSchedule> parts;
    if (lw.is_array()) {
      for (std::size_t i = 0; i < lw.size(); ++i) {
        parts.push_back(littlewood_schedule(params_from_json(lw[i], path("$.littlewood", i))));
      }
    } else {
      parts.push_back(littlewood_schedule(params_from_json(lw, "$.littlewood")));
    }
    if (parts.empty()) fail("$.littlewood", "no instances");
    return parts.size() == 1 ? parts.front() : intersect_schedules(parts);
  }

  CantorSchedule::Explicit data;
  ClosedInterval root = interval_from_json(field(j, "root", "$"), "$.root");
  const Json& br = field(j, "branching", "$");
  if (!br.is_array()) fail("$.branching", "expected an array");
  for (std::size_t i = 0; i < br.size(); ++i) {
    data.branching.push_back(uint_from_json(br[i], path("$.branching", i)));
  }
  if (j.contains("budgets")) {
    const Json& b = j["budgets"];
    if (!b.is_array()) fail("$.budgets", "expected an array");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::string w = path("$.budgets", i);
      const std::size_t m = uint_from_json(field(b[i], "m", w), path(w, "m"));
      const std::size_t n = uint_from_json(field(b[i], "n", w), path(w, "n"));
      data.entries[{m, n}] += rational_from_json(field(b[i], "value", w), path(w, "value"));
    }
  }
  if (j.contains("diagonals")) {
    const Json& d = j["diagonals"];
    if (!d.is_array()) fail("$.diagonals", "expected an array");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string w = path("$.diagonals", i);
      data.diagonals.push_back(
          {uint_from_json(field(d[i], "offset", w), path(w, "offset")),
           rational_from_json(field(d[i], "value", w), path(w, "value"))});
    }
  }
  try {
    return CantorSchedule::from_explicit(root, std::move(data));
  } catch (const DomainError& e) {
    fail("$", e.what());
  }
}

// --- Levels ------------------------------------------------------------------------

Json to_json(const LevelCollection& level) {
  Json ivs = Json::array();
  for (const auto& iv : level.intervals) ivs.push_back(to_json(iv));
  return Json{{"level", level.level},
              {"length", to_json(level.length)},
              {"intervals", ivs},
              {"parents", level.parents}};
}

LevelCollection level_from_json(const Json& j, const std::string& where) {
  LevelCollection lv;
  lv.level = uint_from_json(field(j, "level", where), path(where, "level"));
  const Json& ivs = field(j, "intervals", where);
  if (!ivs.is_array()) fail(path(where, "intervals"), "expected an array");
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    lv.intervals.push_back(interval_from_json(ivs[i], path(path(where, "intervals"), i)));
  }
  if (j.contains("length")) {
    lv.length = rational_from_json(j["length"], path(where, "length"));
  } else if (!lv.intervals.empty()) {
    lv.length = lv.intervals.front().length();
  }
  if (j.contains("parents")) {
    const Json& ps = j["parents"];
    if (!ps.is_array()) fail(path(where, "parents"), "expected an array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      lv.parents.push_back(uint_from_json(ps[i], path(path(where, "parents"), i)));
    }
  }
  if (lv.level > 0 && lv.parents.size() != lv.intervals.size()) {
    fail(path(where, "parents"), "one parent index per interval is required");
  }
  return lv;
}

Json levels_to_json(const std::vector<LevelCollection>& levels) {
  Json arr = Json::array();
  for (const auto& lv : levels) arr.push_back(to_json(lv));
  return Json{{"levels", arr}};
}

std::vector<LevelCollection> levels_from_json(const Json& j) {
  const Json& arr = field(j, "levels", "$");
  if (!arr.is_array()) fail("$.levels", "expected an array");
  std::vector<LevelCollection> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(level_from_json(arr[i], path("$.levels", i)));
  }
  return out;
}

Json to_json(const RemovalLedger& ledger) {
  Json counts = Json::array();
  for (const auto& [key, count] : ledger.counts) {
    counts.push_back(Json{{"m", key.first}, {"ancestor", key.second}, {"count", count}});
  }
  return Json{{"level", ledger.level}, {"total", ledger.total()}, {"counts", counts}};
}

// --- Certificates ------------------------------------------------------------------

Json to_json(const NonEmptinessCertificate& c) {
  Json t = Json::array(), bounds = Json::array();
  for (const auto& v : c.t_values) t.push_back(to_json(v));
  for (const auto& b : c.survivor_lower_bounds) bounds.push_back(to_json(b));
  return Json{{"kind", "nonempty"},
              {"pass", c.pass},
              {"first_failure", optional_json(c.first_failure)},
              {"t_values", t},
              {"survivor_lower_bounds", bounds}};
}

Json to_json(const DimensionCertificate& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) {
    rows.push_back(Json{{"n", r.n},
                        {"branching", r.branching},
                        {"lhs", to_json(r.lhs)},
                        {"rhs", to_json(r.rhs)},
                        {"ok", r.ok}});
  }
  return Json{{"kind", "dimension"},
              {"pass", c.pass},
              {"branching_at_least_4", c.branching_at_least_4},
              {"first_failure", optional_json(c.first_failure)},
              {"rows", rows}};
}

Json to_json(const DimensionBound& b) {
  return Json{{"bound", to_json(b.bound)},
              {"approx", b.bound.midpoint()},
              {"rigorous", b.rigorous},
              {"label", b.rigorous ? "rigorous" : "empirical liminf"},
              {"horizon", b.horizon},
              {"horizon_minimum", to_json(b.horizon_minimum)},
              {"note", b.note}};
}

Json to_json(const ParamsCertificate& c) {
  Json checks = Json::array();
  for (const auto& ch : c.checks) {
    checks.push_back(Json{{"name", ch.name},
                          {"lhs", to_json(ch.lhs)},
                          {"lhs_approx", ch.lhs.midpoint()},
                          {"bound", to_json(ch.bound)},
                          {"pass", ch.pass}});
  }
  return Json{{"pass", c.pass},
              {"checks", checks},
              {"c4", to_json(c.c4)},
              {"c4_approx", c.c4.midpoint()}};
}

Json to_json(const RationalCandidate& c) {
  return Json{{"r", integer_json(c.r)},       {"q", integer_json(c.q)},
              {"k", c.k},                     {"qbar", integer_json(c.qbar)},
              {"height", integer_json(c.height)}, {"stratum", c.stratum}};
}

Json to_json(const WitnessLedger& l) {
  Json strata = Json::array();
  for (const auto& [key, count] : l.kills_by_stratum) {
    strata.push_back(Json{{"k", key.first}, {"l", key.second}, {"kills", count}});
  }
  return Json{{"level", l.level},
              {"ancestor", to_json(l.ancestor)},
              {"candidates", l.candidates},
              {"removed_in_ancestor", l.removed_in_ancestor},
              {"removed_in_active", l.removed_in_active},
              {"budget", to_json(l.budget)},
              {"budget_approx", l.budget.midpoint()},
              {"within_budget", l.within_budget},
              {"kills_by_stratum", strata}};
}

Json to_json(const WitnessCertificate& c) {
  Json params = Json::array(), chain = Json::array(), ledgers = Json::array();
  for (const auto& p : c.instances) params.push_back(to_json(p));
  for (const auto& iv : c.chain) chain.push_back(to_json(iv));
  for (const auto& l : c.ledgers) ledgers.push_back(to_json(l));
  return Json{{"params", params},
              {"chain", chain},
              {"ledgers", ledgers},
              {"height_bound", integer_json(c.height_bound)},
              {"certified", c.certified}};
}

WitnessCertificate witness_from_json(const Json& j) {
  WitnessCertificate c;
  const Json& params = field(j, "params", "$");
  if (params.is_array()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      c.instances.push_back(params_from_json(params[i], path("$.params", i)));
    }
  } else {
    c.instances.push_back(params_from_json(params, "$.params"));
  }
  const Json& chain = field(j, "chain", "$");
  if (!chain.is_array()) fail("$.chain", "expected an array");
  for (std::size_t i = 0; i < chain.size(); ++i) {
    c.chain.push_back(interval_from_json(chain[i], path("$.chain", i)));
  }
  c.height_bound = integer_from_json(field(j, "height_bound", "$"), "$.height_bound");
  if (j.contains("certified") && j["certified"].is_boolean()) c.certified = j["certified"];
  return c;
}

// --- Reports -----------------------------------------------------------------------

Json to_json(const VerifyReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) {
    v.push_back(Json{{"instance", x.instance},
                     {"r", integer_json(x.r)},
                     {"q", integer_json(x.q)},
                     {"level", x.level}});
  }
  return Json{{"ok", r.ok()}, {"checked", r.checked}, {"skipped", r.skipped}, {"violations", v}};
}

Json to_json(const LocalExtraction& x) {
  return Json{{"l_card", x.l_card},
              {"dump_card", x.dump_card},
              {"stabilized_at", x.stabilized_at},
              {"levels", levels_to_json(x.levels)["levels"]}};
}

Json to_json(const ConditionReport& r) {
  return Json{{"c1", r.c1}, {"c2", r.c2}, {"c3", r.c3}, {"local_valid", r.local_valid},
              {"ok", r.ok()}};
}

Json to_json(const MeasureTable& m) {
  Json levels = Json::array();
  for (const auto& w : m.weights) {
    Json row = Json::array();
    for (const auto& x : w) row.push_back(to_json(x));
    levels.push_back(row);
  }
  return Json{{"weights", levels}};
}

Json to_json(const MdpReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) {
    v.push_back(Json{{"interval", to_json(x.interval)}, {"mass_bound", to_json(x.mass_bound)}});
  }
  return Json{{"s", to_json(r.s)},
              {"n0", r.n0},
              {"hypothesis_ok", r.hypothesis_ok},
              {"a_pow_q", to_json(r.a_pow_q)},
              {"a_approx", r.a},
              {"max_ratio_pow_q", to_json(r.max_ratio_pow_q)},
              {"max_ratio_approx", r.max_ratio},
              {"tested", r.tested},
              {"violations", v},
              {"pass", r.pass}};
}

Json to_json(const DistributionReport& r) {
  return Json{{"h", r.h},
              {"nonempty", r.nonempty},
              {"growth", r.growth},
              {"first_empty", optional_json(r.first_empty)},
              {"first_growth_failure", optional_json(r.first_growth_failure)}};
}

}  // namespace gcantor
