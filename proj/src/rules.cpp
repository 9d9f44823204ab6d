#include "gcantor/rules.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace gcantor {

std::uint64_t budget_floor(const Budget& budget) {
  Integer f = budget.is_exact() ? floor_rational(budget.exact())
                                : floor_of_enclosure(budget.refiner());
  if (f < 0) return 0;
  return f.get_ui();
}

RemovalRule empty_rule() {
  return [](const RemovalContext&) { return std::vector<Deletion>{}; };
}

RemovalRule middle_rule(std::uint64_t count) {
  return [count](const RemovalContext& ctx) {
    std::vector<Deletion> out;
    const std::size_t per = static_cast<std::size_t>(ctx.schedule.branching(ctx.level));
    if (count == 0 || count > per) return out;
    const std::size_t first = (per - count) / 2;
    const std::size_t parents = ctx.history[ctx.level].size();
    for (std::size_t p = 0; p < parents; ++p) {
      for (std::size_t j = 0; j < count; ++j) out.push_back({p * per + first + j, ctx.level});
    }
    return out;
  };
}

RemovalRule saturating_rule(SaturationOrder order, std::uint64_t seed) {
  return [order, seed](const RemovalContext& ctx) {
    const std::size_t n = ctx.level;
    std::vector<char> gone(ctx.candidates.size(), 0);
    std::vector<Deletion> out;
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (n + 1)));

    std::vector<BudgetEntry> col = ctx.schedule.column(n);
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.m > b.m; });
    for (const auto& entry : col) {
      const std::uint64_t allowance = budget_floor(entry.value);
      if (allowance == 0) continue;
      // Group the still-present candidates by their level-m ancestor.
      std::map<std::size_t, std::vector<std::size_t>> groups;
      for (std::size_t c = 0; c < ctx.candidates.size(); ++c) {
        if (gone[c]) continue;
        std::size_t anc = ancestor_index(ctx.history, n, ctx.candidates.parents[c], entry.m);
        groups[anc].push_back(c);
      }
      for (auto& [anc, members] : groups) {
        switch (order) {
          case SaturationOrder::kLeftmost:
            break;
          case SaturationOrder::kRandom:
            std::shuffle(members.begin(), members.end(), rng);
            break;
          case SaturationOrder::kClustered:
            // Candidates whose parent has the fewest present siblings first,
            // so whole parents are emptied before others are touched.
            {
              std::map<std::size_t, std::size_t> per_parent;
              for (auto c : members) ++per_parent[ctx.candidates.parents[c]];
              std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
                auto pa = ctx.candidates.parents[a], pb = ctx.candidates.parents[b];
                if (per_parent[pa] != per_parent[pb]) return per_parent[pa] < per_parent[pb];
                return pa < pb;
              });
            }
            break;
        }
        const std::size_t take = static_cast<std::size_t>(
            std::min<std::uint64_t>(allowance, static_cast<std::uint64_t>(members.size())));
        for (std::size_t i = 0; i < take; ++i) {
          gone[members[i]] = 1;
          out.push_back({members[i], entry.m});
        }
      }
    }
    return out;
  };
}

RemovalRule scripted_rule(std::vector<ScriptedDeletion> script) {
  return [script = std::move(script)](const RemovalContext& ctx) {
    std::vector<Deletion> out;
    for (const auto& s : script) {
      if (s.level == ctx.level) out.push_back({s.child, s.stratum});
    }
    return out;
  };
}

}  // namespace gcantor
