#include <benchmark/benchmark.h>

#include "dycoh/dissim.hpp"
#include "dycoh/lattice.hpp"
#include "dycoh/phantom.hpp"
#include "dycoh/rng.hpp"
#include "dycoh/screen.hpp"
#include "dycoh/stats.hpp"

using namespace dycoh;

namespace {

peak_field random_field(uint64_t seed, int64_t n, int k) {
    peak_field pf(grid3(n, 1, 1), k);
    counter_rng rng(seed);
    for (auto& v : pf.data) v = static_cast<float>(0.3 * rng.next_normal());
    return pf;
}

void bm_vec_dissim(benchmark::State& state) {
    const auto x = random_field(1, 1024, 1);
    const auto y = random_field(2, 1024, 1);
    int64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(vec_dissim(x.voxel(i & 1023).subspan(0, 3),
                                            y.voxel((i + 7) & 1023).subspan(0, 3)));
        ++i;
    }
}
BENCHMARK(bm_vec_dissim);

void bm_dyad_cross_dissim(benchmark::State& state) {
    const auto k = static_cast<int>(state.range(0));
    const auto x = random_field(3, 1024, k);
    const auto y = random_field(4, 1024, k);
    int64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dyad_cross_dissim(x, y, i & 1023, (i + 1) & 1023, k));
        ++i;
    }
}
BENCHMARK(bm_dyad_cross_dissim)->Arg(1)->Arg(2)->Arg(4);

void bm_mann_whitney(benchmark::State& state) {
    const auto n = static_cast<size_t>(state.range(0));
    counter_rng rng(5);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = rng.next_normal();
    for (auto& v : b) v = rng.next_normal() + 0.3;
    exact_u_cdf(static_cast<int64_t>(n), static_cast<int64_t>(n)); // warm cache
    for (auto _ : state)
        benchmark::DoNotOptimize(mann_whitney_one_sided(a, b, mw_alternative::a_less));
}
BENCHMARK(bm_mann_whitney)->Arg(10)->Arg(20)->Arg(57);

void bm_exact_u_cdf(benchmark::State& state) {
    const auto n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(exact_u_cdf(n, n));
}
BENCHMARK(bm_exact_u_cdf)->Arg(10)->Arg(20);

void bm_build_lattice(benchmark::State& state) {
    const auto n = state.range(0);
    mask m(grid3(n, n, n));
    counter_rng rng(6);
    for (auto& b : m.data) b = rng.next_unit() < 0.5 ? 1 : 0;
    m.set(0, true);
    for (auto _ : state) benchmark::DoNotOptimize(build_lattice(m, 26));
}
BENCHMARK(bm_build_lattice)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void bm_screen(benchmark::State& state) {
    auto cfg = phantom_config::default_crossing(24, 7);
    cfg.fascicles[0].radius_mm = 4.0;
    cfg.fascicles[1].radius_mm = 4.0;
    cfg.populations[0].n_pairs = 20;
    cfg.populations[1].n_pairs = 20;
    const auto cohort = generate_cohort(cfg, 0);
    const auto graph = build_lattice(cohort.wm, 26);
    const auto interest = cohort.pairs_of_group("interest");
    const auto control = cohort.pairs_of_group("control");
    screen_config sc;
    sc.threads = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(screen_dyads(graph, cohort.peaks, interest, control, sc));
    state.counters["dyads/s"] = benchmark::Counter(
        static_cast<double>(graph.dyads.size()) * static_cast<double>(state.iterations()),
        benchmark::Counter::kIsRate);
}
BENCHMARK(bm_screen)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
