#include <benchmark/benchmark.h>

#include <vector>

#include "pllci/chisq.hpp"
#include "pllci/citest.hpp"
#include "pllci/io.hpp"
#include "pllci/tabulate.hpp"

namespace {

// Dataset with X (3 levels), Y (4 levels) and the conditioning columns that
// match range(1): 0 -> none, 1 -> (2), 2 -> (2,4), 3 -> (2,4,4).
struct Fixture {
  pllci::Dataset data;
  pllci::TestSpec spec{0, 1, {}};

  Fixture(std::size_t n, int scenario) {
    static const std::vector<pllci::Code> cs_levels{2, 4, 4};
    pllci::GenConfig gen;
    gen.n = n;
    gen.levels = {3, 4};
    for (int i = 0; i < scenario; ++i) {
      gen.levels.push_back(cs_levels[i]);
      spec.cs.push_back(static_cast<std::size_t>(i) + 2);
    }
    gen.seed = 11;
    data = pllci::generate(gen);
  }
};

void BM_BuildTable(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(pllci::build_table(f.data, f.spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CiTest(benchmark::State& state, pllci::Method method) {
  const Fixture f(static_cast<std::size_t>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(pllci::ci_test(f.data, f.spec, {method, false}));
}

void BM_BatchScreen(benchmark::State& state) {
  pllci::GenConfig gen;
  gen.n = 5000;
  gen.levels = {3, 4, 2, 3, 5, 2, 4, 3, 2, 3};
  const auto data = pllci::generate(gen);
  const auto specs = pllci::all_pairs(data, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pllci::batch_screen(data, specs, static_cast<std::size_t>(state.range(0))));
  }
}

void BM_LogSf(benchmark::State& state) {
  const auto dof = static_cast<std::uint64_t>(state.range(0));
  double stat = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pllci::log_sf_chisq(stat, dof));
    stat = stat < 2000 ? stat * 1.1 : 0.5;
  }
}

void grid(benchmark::internal::Benchmark* b) {
  for (long n : {3000, 5000, 10000}) {
    for (long s = 0; s <= 3; ++s) b->Args({n, s});
  }
}

}  // namespace

BENCHMARK(BM_BuildTable)->Apply(grid);
BENCHMARK_CAPTURE(BM_CiTest, closed_form, pllci::Method::closed_form)->Apply(grid);
BENCHMARK_CAPTURE(BM_CiTest, ipf, pllci::Method::ipf)->Apply(grid);
BENCHMARK(BM_BatchScreen)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();
BENCHMARK(BM_LogSf)->Arg(1)->Arg(12)->Arg(192);

BENCHMARK_MAIN();
