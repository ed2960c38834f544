// OpenMP kernels against their serial references.

#include "engel/characteristic_dynamics.hpp"
#include "engel/engel_verify.hpp"
#include "engel/prolongations.hpp"
#include "engel/rigidity_lab.hpp"

#include <benchmark/benchmark.h>

namespace {

engel::EngelStructure magnetic(double kappa)
{
    return engel::lorentz_prolongation(
        engel::magnetic_extension(engel::constant_curvature_ut(kappa)));
}

void BM_verify_parallel(benchmark::State& st)
{
    auto s = engel::cartan_prolongation(engel::contact_r3());
    for (auto _ : st)
        benchmark::DoNotOptimize(engel::verify_engel(s, static_cast<std::size_t>(st.range(0))));
}

void BM_verify_serial(benchmark::State& st)
{
    auto s = engel::cartan_prolongation(engel::contact_r3());
    for (auto _ : st)
        benchmark::DoNotOptimize(
            engel::verify_engel_serial(s, static_cast<std::size_t>(st.range(0))));
}

void BM_rigidity_parallel(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(
            engel::rigidity_probe(1.0, static_cast<std::size_t>(st.range(0))));
}

void BM_rigidity_serial(benchmark::State& st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(
            engel::rigidity_probe_serial(1.0, static_cast<std::size_t>(st.range(0))));
}

void BM_global_type_parallel(benchmark::State& st)
{
    auto s = magnetic(-0.5);
    for (auto _ : st)
        benchmark::DoNotOptimize(engel::estimate_global_type(s));
}

void BM_global_type_serial(benchmark::State& st)
{
    auto s = magnetic(-0.5);
    for (auto _ : st)
        benchmark::DoNotOptimize(engel::estimate_global_type_serial(s));
}

}  // namespace

BENCHMARK(BM_verify_parallel)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_verify_serial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rigidity_parallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rigidity_serial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_global_type_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_global_type_serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
