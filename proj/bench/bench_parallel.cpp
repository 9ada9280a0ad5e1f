// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "polycycle/analysis.hpp"
#include "polycycle/oracle.hpp"

using namespace polycycle;

namespace {

const Model& game() {
    static const Model m = load_model(std::string(POLYCYCLE_MODELS_DIR) + "/game.model");
    return m;
}

void return_grid(benchmark::State& state, bool parallel) {
    const Model& m = game();
    const PolycycleGeometry g = m.geometry(m.defaults());
    const ScalarMap R = [&](double s) { return numeric_return(g, s, m.options.integrator); };
    const std::vector<double> s = geometric_grid(1e-2, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(parallel ? evaluate_grid_parallel(R, s) : evaluate_grid_serial(R, s));
}

void compose(benchmark::State& state, bool parallel) {
    ComposeCheckOptions opt;
    opt.parallel = parallel;
    for (auto _ : state) benchmark::DoNotOptimize(compose_check(42, static_cast<int>(state.range(0)), opt));
}

void scan(benchmark::State& state, bool parallel) {
    const Model& m = game();
    const std::vector<GridAxis> axes{parse_grid_axis("l1=0.28:0.31:" + std::to_string(state.range(0)))};
    for (auto _ : state)
        benchmark::DoNotOptimize(parallel ? scan_parallel(m, m.defaults(), axes) : scan_serial(m, m.defaults(), axes));
}

}  // namespace

BENCHMARK_CAPTURE(return_grid, serial, false)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(return_grid, parallel, true)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(compose, serial, false)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(compose, parallel, true)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(scan, serial, false)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(scan, parallel, true)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
