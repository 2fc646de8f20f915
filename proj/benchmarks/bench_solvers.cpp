#include <benchmark/benchmark.h>

#include "chromonet/ensemble.hpp"
#include "chromonet/exciton.hpp"
#include "chromonet/pathways.hpp"
#include "chromonet/tc2solver.hpp"

using namespace chromonet;

namespace {

struct Instance {
    ExcitonHamiltonian h;
    SinkSpec sinks;
    std::size_t initial;
};

Instance make_instance(std::size_t n, double d, std::uint64_t seed) {
    const auto cfg = sample_configuration(n, d, 500.0, seed);
    return {build_hamiltonian(cfg, CouplingModel{}), SinkSpec{1e-3, 1.0, cfg.trap_index}, cfg.initial_index};
}

void bm_ete_laplace(benchmark::State& state) {
    const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 50.0, 11);
    const BathSpec bath{35.0, 50.0, 298.0};
    for (auto _ : state) benchmark::DoNotOptimize(ete_laplace(inst.h, bath, inst.sinks, inst.initial).eta);
}
BENCHMARK(bm_ete_laplace)->Arg(7)->Arg(14)->Arg(20)->Unit(benchmark::kMillisecond);

void bm_time_domain(benchmark::State& state) {
    const auto inst = make_instance(7, 60.0, 3);
    const BathSpec bath{static_cast<double>(state.range(0)), 50.0, 298.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(propagate_time_domain(inst.h, bath, inst.sinks, inst.initial).transport.eta);
}
BENCHMARK(bm_time_domain)->Arg(35)->Arg(350)->Unit(benchmark::kMillisecond)->Iterations(3);

void bm_path_strengths(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto inst = make_instance(n, 40.0, 5);
    for (auto _ : state) benchmark::DoNotOptimize(all_path_strengths(inst.h, 0, n - 1).size());
}
BENCHMARK(bm_path_strengths)->Arg(7)->Arg(10)->Unit(benchmark::kMillisecond);

void bm_run_cell(benchmark::State& state) {
    SweepPlan plan;
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_cell(plan, Cell{7, 50.0, 35.0}, i++).eta);
}
BENCHMARK(bm_run_cell)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
