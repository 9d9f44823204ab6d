// Serial reference loops against their OpenMP counterparts. The second
// benchmark argument selects the policy: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "gcantor/littlewood.hpp"
#include "gcantor/local_extract.hpp"
#include "gcantor/rules.hpp"

using namespace gcantor;

namespace {

ExecPolicy policy(const benchmark::State& state) {
  return state.range(1) == 0 ? ExecPolicy::kSerial : ExecPolicy::kParallel;
}

CantorSchedule zero_schedule(std::uint64_t r) {
  CantorSchedule::Explicit d;
  d.branching = {r};
  return CantorSchedule::from_explicit(ClosedInterval(Rational(0), Rational(1)), d);
}

InstanceParams bench_params() {
  return InstanceParams::make(1u << 18, pow_rational(Rational(2), -27),
                              pow_rational(Rational(2), -80), Variant::kProp1,
                              DSequence::constant(2));
}

void BM_Split(benchmark::State& state) {
  auto s = zero_schedule(4);
  auto levels = build(s, empty_rule(), static_cast<std::size_t>(state.range(0))).levels;
  for (auto _ : state) {
    benchmark::DoNotOptimize(split(levels.back(), 4, policy(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(levels.back().size()) * 4);
}
BENCHMARK(BM_Split)->ArgsProduct({{6, 8}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Enumerate(benchmark::State& state) {
  auto p = bench_params();
  const Rational mid = p.c1 / 2;
  // A window of width |J_1| around the middle of the root.
  ClosedInterval window(mid, mid + p.c1 / Rational(static_cast<unsigned long>(p.R)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_candidates(static_cast<std::size_t>(state.range(0)), window, p,
                                                  policy(state)));
  }
}
BENCHMARK(BM_Enumerate)->ArgsProduct({{2}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  auto p = InstanceParams::make(64, Rational(1, 8), pow_rational(Rational(2), -16), Variant::kProp1,
                                DSequence::constant(2));
  WitnessOptions opt;
  opt.budgets = BudgetPolicy::kReport;
  WitnessCertificate w = witness(p, 3, opt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_witness(w, static_cast<std::uint64_t>(state.range(0)), policy(state)));
  }
}
BENCHMARK(BM_Verify)->ArgsProduct({{100000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Sieve(benchmark::State& state) {
  auto p = InstanceParams::make(64, Rational(1, 8), pow_rational(Rational(2), -16), Variant::kProp1,
                                DSequence::constant(2));
  WitnessOptions opt;
  opt.budgets = BudgetPolicy::kReport;
  WitnessCertificate w = witness(p, static_cast<std::size_t>(state.range(0)), opt);
  for (auto _ : state) benchmark::DoNotOptimize(sieve_soundness(w, policy(state)));
}
BENCHMARK(BM_Sieve)->ArgsProduct({{4}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_MaxWindowSums(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<std::uint64_t> masses(static_cast<std::size_t>(state.range(0)));
  for (auto& m : masses) m = rng() % 3 == 0 ? 0 : rng() % 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(max_window_sums(masses, masses.size(), policy(state)));
  }
}
BENCHMARK(BM_MaxWindowSums)->ArgsProduct({{4096, 16384}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
