#pragma once

// Ready-made removal rules. The framework only bounds how many children may
// be removed; these decide which ones.

#include <cstdint>
#include <vector>

#include "gcantor/cantor_core.hpp"

namespace gcantor {

RemovalRule empty_rule();

/// Deletes the `count` middle children of every parent, charged to stratum n.
/// With R_n = 3 and count = 1 this is the middle-third construction.
RemovalRule middle_rule(std::uint64_t count = 1);

enum class SaturationOrder { kLeftmost, kRandom, kClustered };

/// Spends every budget in full: for m = n, n-1, ..., 0 and each level-m
/// ancestor, deletes floor(r_{m,n}) still-present candidates inside it (or all
/// of them if fewer remain). kClustered empties whole parents first.
RemovalRule saturating_rule(SaturationOrder order, std::uint64_t seed = 0);

struct ScriptedDeletion {
  std::size_t level = 0;  // n: the deletion applies when building J_{n+1}
  std::size_t child = 0;
  std::size_t stratum = 0;
};

RemovalRule scripted_rule(std::vector<ScriptedDeletion> script);

/// floor of a budget as a deletion count.
std::uint64_t budget_floor(const Budget& budget);

}  // namespace gcantor
