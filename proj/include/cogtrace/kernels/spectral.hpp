#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

// Data-parallel signal kernels. Every kernel exists twice: `serial` is the
// reference implementation kept for testing, `parallel` is the OpenMP
// version used in production. Both produce bit-identical results because
// parallel work is split into independent slots and reduced in order.
namespace cogtrace::kernels {

struct WelchParams {
    double segment_s = 2.0;
    double overlap = 0.5;  // fraction of a segment shared with the next one
};

// One-sided power spectral density, bin k at frequency k * df.
struct Spectrum {
    double df = 0.0;
    std::vector<double> density;

    // Integral over bins with low <= f < high.
    double band(double low, double high) const;
    double total() const;
};

struct Band {
    double low = 0.0;
    double high = 0.0;
};

// Sliding epochs over a multichannel recording. Each epoch spans
// `epoch_samples` samples and starts `hop_samples` after the previous one.
struct EpochLayout {
    std::size_t epoch_samples = 0;
    std::size_t hop_samples = 0;
};

// Per epoch, per band: band power averaged over channels. Row-major
// [epoch][band].
struct EpochBandPower {
    std::size_t epochs = 0;
    std::size_t bands = 0;
    std::vector<std::size_t> first_sample;  // per epoch
    std::vector<double> power;

    double at(std::size_t epoch, std::size_t band) const { return power[epoch * bands + band]; }
};

// Half-open index ranges [first, last) of sorted timestamps inside
// closed time intervals [lo, hi].
using Interval = std::pair<double, double>;
using IndexRange = std::pair<std::size_t, std::size_t>;

namespace serial {
Spectrum welch_psd(std::span<const double> signal, double rate, const WelchParams& params = {});
EpochBandPower epoch_band_power(std::span<const std::vector<double>> channels, double rate,
                                EpochLayout layout, std::span<const Band> bands,
                                const WelchParams& params = {});
std::vector<IndexRange> sample_ranges(std::span<const double> timestamps,
                                      std::span<const Interval> intervals);
}  // namespace serial

namespace parallel {
Spectrum welch_psd(std::span<const double> signal, double rate, const WelchParams& params = {});
EpochBandPower epoch_band_power(std::span<const std::vector<double>> channels, double rate,
                                EpochLayout layout, std::span<const Band> bands,
                                const WelchParams& params = {});
std::vector<IndexRange> sample_ranges(std::span<const double> timestamps,
                                      std::span<const Interval> intervals);
}  // namespace parallel

}  // namespace cogtrace::kernels
