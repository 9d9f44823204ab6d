#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gcantor/cantor_core.hpp"

namespace gcantor::testing {

inline ClosedInterval unit() { return ClosedInterval(Rational(0), Rational(1)); }

/// Constant branching r with r_{n,n} = diag and r_{n-1,n} = sub.
inline CantorSchedule constant_schedule(std::uint64_t r, Rational diag, Rational sub = 0,
                                        ClosedInterval root = unit()) {
  CantorSchedule::Explicit d;
  d.branching = {r};
  if (diag != 0) d.diagonals.push_back({0, diag});
  if (sub != 0) d.diagonals.push_back({1, sub});
  return CantorSchedule::from_explicit(root, d);
}

inline CantorSchedule explicit_schedule(std::vector<std::uint64_t> branching,
                                        std::map<std::pair<std::size_t, std::size_t>, Rational> e,
                                        ClosedInterval root = unit()) {
  CantorSchedule::Explicit d;
  d.branching = std::move(branching);
  d.entries = std::move(e);
  return CantorSchedule::from_explicit(root, d);
}

inline std::vector<std::size_t> sizes(const std::vector<LevelCollection>& levels) {
  std::vector<std::size_t> out;
  for (const auto& l : levels) out.push_back(l.size());
  return out;
}

}  // namespace gcantor::testing
