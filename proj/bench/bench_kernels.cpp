// Serial reference vs OpenMP kernels on recording-sized inputs.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cogtrace/kernels/spectral.hpp"

namespace k = cogtrace::kernels;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 10.0);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

// 14 EEG channels at 128 Hz.
std::vector<std::vector<double>> eeg(double seconds) {
    std::vector<std::vector<double>> ch;
    for (unsigned c = 0; c < 14; ++c) ch.push_back(noise(static_cast<std::size_t>(128 * seconds), c));
    return ch;
}

const k::Band kBands[] = {{4.0, 7.0}, {7.0, 13.0}};

template <auto Fn>
void welch(benchmark::State& state) {
    const auto x = noise(static_cast<std::size_t>(128 * state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 128.0, k::WelchParams{}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}

template <auto Fn>
void epochs(benchmark::State& state) {
    const auto ch = eeg(static_cast<double>(state.range(0)));
    const k::EpochLayout layout{256, 32};
    for (auto _ : state) benchmark::DoNotOptimize(Fn(ch, 128.0, layout, std::span<const k::Band>(kBands), k::WelchParams{1.0, 0.5}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ch.size() * ch[0].size()));
}

template <auto Fn>
void ranges(benchmark::State& state) {
    std::vector<double> ts(static_cast<std::size_t>(128 * 3600));
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<double>(i) / 128.0;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 3590.0);
    std::vector<k::Interval> iv(static_cast<std::size_t>(state.range(0)));
    for (auto& w : iv) {
        w.first = u(rng);
        w.second = w.first + 1.3;
    }
    for (auto _ : state) benchmark::DoNotOptimize(Fn(ts, iv));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(welch<k::serial::welch_psd>)->Name("welch_psd/serial")->Arg(60)->Arg(600);
BENCHMARK(welch<k::parallel::welch_psd>)->Name("welch_psd/parallel")->Arg(60)->Arg(600);
BENCHMARK(epochs<k::serial::epoch_band_power>)->Name("epoch_band_power/serial")->Arg(60)->Arg(300);
BENCHMARK(epochs<k::parallel::epoch_band_power>)->Name("epoch_band_power/parallel")->Arg(60)->Arg(300);
BENCHMARK(ranges<k::serial::sample_ranges>)->Name("sample_ranges/serial")->Arg(1000)->Arg(100000);
BENCHMARK(ranges<k::parallel::sample_ranges>)->Name("sample_ranges/parallel")->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
