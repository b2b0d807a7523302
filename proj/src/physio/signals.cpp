#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogtrace/common/error.hpp"
#include "cogtrace/physio/filters.hpp"
#include "cogtrace/physio/metrics.hpp"

namespace cogtrace::physio {

namespace {

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!std::isfinite(v)) throw SignalError(std::string(what) + " contains non-finite samples");
}

struct Extremum {
    std::size_t index;
    bool is_max;
};

// Turning points of a series; interior only.
std::vector<Extremum> turning_points(const std::vector<double>& f) {
    std::vector<Extremum> out;
    int dir = 0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        const double d = f[i] - f[i - 1];
        if (d == 0.0) continue;
        const int s = d > 0.0 ? 1 : -1;
        if (dir != 0 && s != dir) out.push_back({i - 1, dir > 0});
        dir = s;
    }
    return out;
}

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

}  // namespace

std::vector<ScrEvent> detect_scrs(std::span<const double> eda, double rate, const ScrParams& params) {
    if (!(rate >= kMinEdaRate)) throw SignalError("EDA rate must be at least 16 Hz");
    if (!(params.min_amplitude > 0.0) || !(params.refine_s >= 0.0))
        throw ConfigError("SCR min_amplitude must be positive and refine_s non-negative");
    require_finite(eda, "EDA series");
    if (static_cast<double>(eda.size()) < std::ceil(kScrWarmupS * rate))
        throw SignalError("EDA series is shorter than the filter warm-up");

    const Biquad lp = butter_lowpass(params.lowpass_hz, rate);
    const auto f = filtfilt(std::span(&lp, 1), eda);
    const auto ext = turning_points(f);
    const auto radius = static_cast<std::size_t>(std::lround(params.refine_s * rate));
    const std::size_t last = eda.size() - 1;

    std::vector<ScrEvent> events;
    for (std::size_t k = 0; k + 1 < ext.size(); ++k) {
        if (ext[k].is_max || !ext[k + 1].is_max) continue;
        const std::size_t lo_i = ext[k].index, hi_i = ext[k + 1].index;
        // Half the threshold: low-passing flattens short peaks, the raw rise decides.
        if (f[hi_i] - f[lo_i] < 0.5 * params.min_amplitude) continue;

        const std::size_t prev = k > 0 ? ext[k - 1].index : 0;
        const std::size_t next = k + 2 < ext.size() ? ext[k + 2].index : last;
        std::size_t a = std::max(lo_i > radius ? lo_i - radius : 0, prev);
        std::size_t b = std::min(lo_i + radius, hi_i);
        std::size_t onset = a;
        for (std::size_t i = a; i <= b; ++i)
            if (eda[i] <= eda[onset]) onset = i;

        a = std::max(hi_i > radius ? hi_i - radius : 0, onset + 1);
        b = std::min(hi_i + radius, next);
        if (a > b) continue;
        std::size_t peak = a;
        for (std::size_t i = a; i <= b; ++i)
            if (eda[i] > eda[peak]) peak = i;

        const double amplitude = eda[peak] - eda[onset];
        if (amplitude < params.min_amplitude) continue;
        events.push_back({static_cast<double>(onset) / rate, static_cast<double>(peak) / rate, amplitude, onset, peak});
    }
    return events;
}

BandPower band_power(std::span<const double> channel, double rate, kernels::Band band, std::string name,
                     const kernels::WelchParams& welch) {
    if (!(band.low >= 0.0) || !(band.high > band.low)) throw SignalError("band must satisfy 0 <= low < high");
    if (!(rate > 2.0 * band.high)) throw SignalError("band reaches the Nyquist frequency");
    require_finite(channel, "EEG channel");
    if (static_cast<double>(channel.size()) < std::round(welch.segment_s * rate))
        throw SignalError("window is shorter than one Welch segment");
    const auto spectrum = kernels::parallel::welch_psd(channel, rate, welch);
    return {std::move(name), band.low, band.high, spectrum.band(band.low, band.high)};
}

double pupil_dilation_pct(std::span<const double> series, std::span<const double> baseline) {
    if (series.empty() || baseline.empty()) throw SignalError("pupil series and baseline must be non-empty");
    require_finite(series, "pupil series");
    require_finite(baseline, "pupil baseline");
    const double base = mean(baseline);
    if (!(base > 0.0)) throw SignalError("pupil baseline mean must be positive");
    return 100.0 * (mean(series) - base) / base;
}

HeartRate heart_rate(std::span<const double> ppg, double rate, const HeartParams& params) {
    if (!(rate > 0.0)) throw SignalError("PPG rate must be positive");
    require_finite(ppg, "PPG series");
    if (static_cast<double>(ppg.size()) < params.min_duration_s * rate)
        throw SignalError("PPG series is shorter than the minimum duration");

    const Biquad sections[] = {butter_highpass(params.band_low_hz, rate), butter_lowpass(params.band_high_hz, rate)};
    const auto f = filtfilt(sections, ppg);
    const double m = mean(f);
    double var = 0.0;
    for (double v : f) var += (v - m) * (v - m);
    const double threshold = m + 0.5 * std::sqrt(var / static_cast<double>(f.size()));
    const auto refractory = static_cast<std::size_t>(std::lround(params.refractory_s * rate));

    HeartRate hr;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        if (!(f[i] > f[i - 1] && f[i] >= f[i + 1] && f[i] > threshold)) continue;
        if (!hr.beat_indices.empty() && i - hr.beat_indices.back() < refractory) {
            if (f[i] > f[hr.beat_indices.back()]) hr.beat_indices.back() = i;
            continue;
        }
        hr.beat_indices.push_back(i);
    }
    if (hr.beat_indices.size() < 2) throw SignalError("fewer than two heart beats detected");

    for (auto i : hr.beat_indices) hr.beat_times.push_back(static_cast<double>(i) / rate);
    for (std::size_t k = 1; k < hr.beat_times.size(); ++k) hr.ibis.push_back(hr.beat_times[k] - hr.beat_times[k - 1]);
    const double mean_ibi = mean(hr.ibis);
    double ss = 0.0;
    for (double v : hr.ibis) ss += (v - mean_ibi) * (v - mean_ibi);
    hr.bpm = 60.0 / mean_ibi;
    hr.ibi_cv = std::sqrt(ss / static_cast<double>(hr.ibis.size())) / mean_ibi;
    hr.reliable = hr.ibi_cv <= params.max_cv;
    return hr;
}

}  // namespace cogtrace::physio
