#include <phychal/experiment.hpp>
#include <phychal/ofdm.hpp>
#include <phychal/protocol.hpp>
#include <phychal/security.hpp>
#include <phychal/stats.hpp>
#include <phychal/tikhonov.hpp>

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace phychal;

scenario_config scenario_one() {
    scenario_config sc;
    sc.plan = allocate_equispaced(sc.ofdm.fft_size, 32);
    return sc;
}

void bm_marcum_q(benchmark::State& state) {
    double b = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(marcum_q(4, 3400.0, 3000.0 + b));
        b += 1e-9;
    }
}
BENCHMARK(bm_marcum_q);

void bm_tikhonov_sample(benchmark::State& state) {
    rng_t rng(7);
    for (auto _ : state) benchmark::DoNotOptimize(tikhonov_sample(rng, 1.5));
}
BENCHMARK(bm_tikhonov_sample);

void bm_fit_noncentral_chi_square(benchmark::State& state) {
    rng_t rng(11);
    std::vector<double> samples(10000);
    for (auto& s : samples) {
        const double a = sample_normal(rng) + 8.0;
        const double b = sample_normal(rng);
        s = a * a + b * b;
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_noncentral_chi_square(samples, 1));
}
BENCHMARK(bm_fit_noncentral_chi_square);

void bm_modulate_demodulate(benchmark::State& state) {
    const ofdm_config cfg;
    std::vector<cplx> bins(static_cast<std::size_t>(cfg.fft_size), cplx(1.0, 0.0));
    for (auto _ : state) {
        auto stream = modulate(bins, cfg);
        benchmark::DoNotOptimize(demodulate(stream, cfg));
    }
}
BENCHMARK(bm_modulate_demodulate);

void bm_protocol_trial(benchmark::State& state) {
    const auto sc = scenario_one();
    rng_t rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            run_protocol_trial(sc, hypothesis::genuine, rng));
}
BENCHMARK(bm_protocol_trial);

void bm_protocol_trial_searched(benchmark::State& state) {
    auto sc = scenario_one();
    sc.plan = allocate_equispaced(sc.ofdm.fft_size, 128);
    sc.slots = 4;
    sc.impairments.carrier_offset_max = 0.1;
    sc.impairments.sample_offset_max = 10;
    sc.search_grid_size = 200;
    sc.search_ramp_max = default_search_ramp(sc.plan, sc.ofdm, 10);
    rng_t rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            run_protocol_trial(sc, hypothesis::genuine, rng));
}
BENCHMARK(bm_protocol_trial_searched);

void bm_coherent_mi(benchmark::State& state) {
    double beta = 1.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(coherent_mi(beta, 2));
        beta += 1e-12;
    }
}
BENCHMARK(bm_coherent_mi);

} // namespace

BENCHMARK_MAIN();
