#include <benchmark/benchmark.h>

#include <random>

#include "cogwifi/eval.hpp"
#include "cogwifi/ml/svr.hpp"

using namespace cogwifi;

namespace {

const SimulationLog& sample_log() {
    static const SimulationLog log = run(load_scenario("sim.duration_s = 120\n"), Policies{});
    return log;
}

const Dataset& handover_rows() {
    static const Dataset ds = collect_handover_dataset(load_scenario(""), std::vector<std::uint64_t>{1});
    return ds;
}

std::vector<int> labels_of(const Dataset& ds) {
    std::vector<int> y;
    for (double v : ds.y) y.push_back(static_cast<int>(v));
    return y;
}

ml::Matrix gaussian_rows(std::size_t n, std::size_t d) {
    std::mt19937_64 eng(3);
    std::normal_distribution<double> z;
    ml::Matrix x(n, std::vector<double>(d));
    for (auto& r : x)
        for (auto& v : r) v = z(eng);
    return x;
}

ml::ForestParams bench_forest() {
    ml::ForestParams p;
    p.n_trees = 32;
    return p;
}

} // namespace

static void BM_ForestTrain(benchmark::State& state) {
    const auto& ds = handover_rows();
    for (auto _ : state) benchmark::DoNotOptimize(ml::rf_train(ds, bench_forest(), 7, static_cast<int>(state.range(0))));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.size()));
}
BENCHMARK(BM_ForestTrain)->Arg(0)->Unit(benchmark::kMillisecond);

static void BM_ForestTrainSerial(benchmark::State& state) {
    const auto& ds = handover_rows();
    const auto y = labels_of(ds);
    for (auto _ : state) benchmark::DoNotOptimize(ml::rf_train_serial(ds.x, y, bench_forest(), 7));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(ds.size()));
}
BENCHMARK(BM_ForestTrainSerial)->Unit(benchmark::kMillisecond);

static void BM_KernelMatrix(benchmark::State& state) {
    const auto x = gaussian_rows(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(ml::kernel_matrix(x, 0.1));
}
BENCHMARK(BM_KernelMatrix)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_KernelMatrixSerial(benchmark::State& state) {
    const auto x = gaussian_rows(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) benchmark::DoNotOptimize(ml::kernel_matrix_serial(x, 0.1));
}
BENCHMARK(BM_KernelMatrixSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ApSelectionRows(benchmark::State& state) {
    const auto& log = sample_log();
    for (auto _ : state) benchmark::DoNotOptimize(build_ap_selection_dataset(log));
}
BENCHMARK(BM_ApSelectionRows)->Unit(benchmark::kMillisecond);

static void BM_ApSelectionRowsSerial(benchmark::State& state) {
    const auto& log = sample_log();
    for (auto _ : state) benchmark::DoNotOptimize(build_ap_selection_dataset_serial(log));
}
BENCHMARK(BM_ApSelectionRowsSerial)->Unit(benchmark::kMillisecond);

static void BM_SimulateDefaultScenario(benchmark::State& state) {
    const auto cfg = load_scenario("");
    for (auto _ : state) benchmark::DoNotOptimize(run(cfg, Policies{}));
}
BENCHMARK(BM_SimulateDefaultScenario)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
