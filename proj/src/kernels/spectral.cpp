#include "cogtrace/kernels/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "cogtrace/common/error.hpp"
#include "fft_plan.hpp"

namespace cogtrace::kernels {

double Spectrum::band(double low, double high) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) {
        const double f = static_cast<double>(k) * df;
        if (f >= low && f < high) sum += density[k];
    }
    return sum * df;
}

double Spectrum::total() const {
    double sum = 0.0;
    for (double d : density) sum += d;
    return sum * df;
}

namespace {

std::size_t segment_length(double rate, const WelchParams& p) {
    if (!(rate > 0.0)) throw SignalError("sampling rate must be positive");
    const auto seg = static_cast<std::size_t>(std::lround(p.segment_s * rate));
    if (seg < 4) throw SignalError("Welch segment shorter than 4 samples");
    return seg;
}

detail::WelchPlan make_plan(double rate, const WelchParams& p) {
    const auto seg = segment_length(rate, p);
    if (!(p.overlap >= 0.0 && p.overlap < 1.0)) throw SignalError("Welch overlap must be in [0, 1)");
    const auto overlap = static_cast<std::size_t>(std::lround(static_cast<double>(seg) * p.overlap));
    return detail::WelchPlan(seg, std::max<std::size_t>(1, seg - overlap), rate);
}

// Welch average of x[0, n) into `acc` (bins entries); segments reduced in order.
void welch_into(const detail::WelchPlan& plan, const double* x, std::size_t n,
                detail::FftScratch& scratch, std::vector<double>& tmp, std::vector<double>& acc) {
    const auto bins = plan.fft.bins();
    const auto nseg = plan.segments_for(n);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t s = 0; s < nseg; ++s) {
        plan.periodogram(x + s * plan.step, scratch, tmp.data());
        for (std::size_t k = 0; k < bins; ++k) acc[k] += tmp[k];
    }
    for (auto& v : acc) v /= static_cast<double>(nseg);
}

double band_of(const std::vector<double>& density, double df, Band b) {
    Spectrum s{df, density};
    return s.band(b.low, b.high);
}

void check_channels(std::span<const std::vector<double>> channels) {
    if (channels.empty()) throw SignalError("no channels");
    for (const auto& c : channels)
        if (c.size() != channels.front().size()) throw SignalError("channels differ in length");
}

std::size_t epoch_count(std::size_t n, EpochLayout layout) {
    if (layout.epoch_samples == 0 || layout.hop_samples == 0) throw SignalError("empty epoch layout");
    return n < layout.epoch_samples ? 0 : 1 + (n - layout.epoch_samples) / layout.hop_samples;
}

IndexRange range_of(std::span<const double> ts, Interval iv) {
    auto lo = std::lower_bound(ts.begin(), ts.end(), iv.first);
    auto hi = std::upper_bound(lo, ts.end(), iv.second);
    return {static_cast<std::size_t>(lo - ts.begin()), static_cast<std::size_t>(hi - ts.begin())};
}

}  // namespace

namespace serial {

Spectrum welch_psd(std::span<const double> signal, double rate, const WelchParams& params) {
    const auto plan = make_plan(rate, params);
    if (signal.size() < plan.segment) throw SignalError("signal shorter than one Welch segment");
    const auto bins = plan.fft.bins();
    detail::FftScratch scratch(plan.segment);
    std::vector<double> tmp(bins), acc(bins);
    welch_into(plan, signal.data(), signal.size(), scratch, tmp, acc);
    return {rate / static_cast<double>(plan.segment), std::move(acc)};
}

EpochBandPower epoch_band_power(std::span<const std::vector<double>> channels, double rate,
                                EpochLayout layout, std::span<const Band> bands,
                                const WelchParams& params) {
    check_channels(channels);
    const auto plan = make_plan(rate, params);
    if (layout.epoch_samples < plan.segment) throw SignalError("epoch shorter than one Welch segment");
    const auto n = channels.front().size();
    EpochBandPower out;
    out.epochs = epoch_count(n, layout);
    out.bands = bands.size();
    out.power.assign(out.epochs * out.bands, 0.0);
    const auto bins = plan.fft.bins();
    const double df = rate / static_cast<double>(plan.segment);
    detail::FftScratch scratch(plan.segment);
    std::vector<double> tmp(bins), acc(bins);
    for (std::size_t e = 0; e < out.epochs; ++e) {
        const auto first = e * layout.hop_samples;
        out.first_sample.push_back(first);
        for (const auto& ch : channels) {
            welch_into(plan, ch.data() + first, layout.epoch_samples, scratch, tmp, acc);
            for (std::size_t b = 0; b < bands.size(); ++b)
                out.power[e * out.bands + b] += band_of(acc, df, bands[b]);
        }
        for (std::size_t b = 0; b < bands.size(); ++b)
            out.power[e * out.bands + b] /= static_cast<double>(channels.size());
    }
    return out;
}

std::vector<IndexRange> sample_ranges(std::span<const double> timestamps,
                                      std::span<const Interval> intervals) {
    std::vector<IndexRange> out;
    out.reserve(intervals.size());
    for (const auto& iv : intervals) out.push_back(range_of(timestamps, iv));
    return out;
}

}  // namespace serial

namespace parallel {

Spectrum welch_psd(std::span<const double> signal, double rate, const WelchParams& params) {
    const auto plan = make_plan(rate, params);
    if (signal.size() < plan.segment) throw SignalError("signal shorter than one Welch segment");
    const auto bins = plan.fft.bins();
    const auto nseg = plan.segments_for(signal.size());
    std::vector<double> per_segment(nseg * bins);
    const long long nseg_ll = static_cast<long long>(nseg);
#pragma omp parallel
    {
        detail::FftScratch scratch(plan.segment);
#pragma omp for schedule(static)
        for (long long s = 0; s < nseg_ll; ++s) {
            const auto su = static_cast<std::size_t>(s);
            plan.periodogram(signal.data() + su * plan.step, scratch, per_segment.data() + su * bins);
        }
    }
    std::vector<double> acc(bins, 0.0);
    for (std::size_t s = 0; s < nseg; ++s)
        for (std::size_t k = 0; k < bins; ++k) acc[k] += per_segment[s * bins + k];
    for (auto& v : acc) v /= static_cast<double>(nseg);
    return {rate / static_cast<double>(plan.segment), std::move(acc)};
}

EpochBandPower epoch_band_power(std::span<const std::vector<double>> channels, double rate,
                                EpochLayout layout, std::span<const Band> bands,
                                const WelchParams& params) {
    check_channels(channels);
    const auto plan = make_plan(rate, params);
    if (layout.epoch_samples < plan.segment) throw SignalError("epoch shorter than one Welch segment");
    const auto n = channels.front().size();
    EpochBandPower out;
    out.epochs = epoch_count(n, layout);
    out.bands = bands.size();
    out.power.assign(out.epochs * out.bands, 0.0);
    for (std::size_t e = 0; e < out.epochs; ++e) out.first_sample.push_back(e * layout.hop_samples);
    const auto bins = plan.fft.bins();
    const double df = rate / static_cast<double>(plan.segment);
    const long long epochs_ll = static_cast<long long>(out.epochs);
#pragma omp parallel
    {
        detail::FftScratch scratch(plan.segment);
        std::vector<double> tmp(bins), acc(bins);
#pragma omp for schedule(dynamic, 4)
        for (long long el = 0; el < epochs_ll; ++el) {
            const auto e = static_cast<std::size_t>(el);
            const auto first = out.first_sample[e];
            double* row = out.power.data() + e * out.bands;
            for (const auto& ch : channels) {
                welch_into(plan, ch.data() + first, layout.epoch_samples, scratch, tmp, acc);
                for (std::size_t b = 0; b < bands.size(); ++b) row[b] += band_of(acc, df, bands[b]);
            }
            for (std::size_t b = 0; b < bands.size(); ++b) row[b] /= static_cast<double>(channels.size());
        }
    }
    return out;
}

std::vector<IndexRange> sample_ranges(std::span<const double> timestamps,
                                      std::span<const Interval> intervals) {
    std::vector<IndexRange> out(intervals.size());
    const long long m = static_cast<long long>(intervals.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = range_of(timestamps, intervals[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace parallel

}  // namespace cogtrace::kernels
