#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cogtrace/gaze/mapping.hpp"
#include "cogtrace/kernels/spectral.hpp"
#include "cogtrace/recorder/session.hpp"

namespace cogtrace::physio {

struct ScrEvent {
    double onset = 0.0;  // seconds from the first sample
    double peak = 0.0;
    double amplitude = 0.0;  // microsiemens
    std::size_t onset_index = 0;
    std::size_t peak_index = 0;

    double rise_time() const noexcept { return peak - onset; }
    bool operator==(const ScrEvent&) const = default;
};

struct ScrParams {
    double min_amplitude = 0.01;
    double lowpass_hz = 1.0;
    double refine_s = 0.5;  // search radius for the raw-signal extremum
};

inline constexpr double kMinEdaRate = 16.0;
inline constexpr double kScrWarmupS = 1.0;

// Trough-to-peak SCR detection. Troughs and peaks are paired on the
// low-passed series and then located on the raw series near the filtered
// extremum (latest trough, earliest peak on ties). An event is kept when
// the filtered rise reaches half of min_amplitude and the raw rise reaches
// min_amplitude; the raw rise is reported. Throws SignalError for rate < 16 Hz, non-finite input or fewer
// than one second of samples.
std::vector<ScrEvent> detect_scrs(std::span<const double> eda, double rate, const ScrParams& params = {});

struct BandPower {
    std::string name;
    double low = 0.0;
    double high = 0.0;
    double power = 0.0;  // uV^2, integral of the density over [low, high)

    bool operator==(const BandPower&) const = default;
};

inline constexpr kernels::Band kAlphaBand{7.0, 13.0};
inline constexpr kernels::Band kThetaBand{4.0, 7.0};

// Welch estimate integrated over the band. Throws SignalError when the band
// reaches Nyquist or the window holds less than one Welch segment.
BandPower band_power(std::span<const double> channel, double rate, kernels::Band band, std::string name = {},
                     const kernels::WelchParams& welch = {});

// 100 * (mean(series) - mean(baseline)) / mean(baseline)
double pupil_dilation_pct(std::span<const double> series, std::span<const double> baseline);

struct HeartRate {
    double bpm = 0.0;
    std::vector<std::size_t> beat_indices;
    std::vector<double> beat_times;  // seconds from the first sample
    std::vector<double> ibis;        // seconds
    double ibi_cv = 0.0;
    bool reliable = true;
};

struct HeartParams {
    double band_low_hz = 0.5;
    double band_high_hz = 4.0;
    double refractory_s = 0.3;
    double max_cv = 0.2;
    double min_duration_s = 10.0;
};

// Peaks of the band-passed pulse signal. Throws SignalError for fewer than
// min_duration_s of samples or fewer than two beats.
HeartRate heart_rate(std::span<const double> ppg, double rate, const HeartParams& params = {});

struct MetricRow {
    std::string symbol_id;
    double gaze_duration_ms = 0.0;
    std::optional<int> scr_count;
    std::optional<double> scr_mean_rise_s;
    std::optional<double> pupil_dilation_pct;
    std::optional<double> alpha_power;
    std::optional<double> theta_power;
    std::optional<double> heart_rate_bpm;
    std::optional<double> temp_c;

    bool operator==(const MetricRow&) const = default;
};

// Rows ordered by symbol_id.
struct MetricTable {
    std::vector<MetricRow> rows;

    const MetricRow* find(std::string_view symbol_id) const;
    bool operator==(const MetricTable&) const = default;
};

inline constexpr const char* kMetricColumns[] = {
    "gaze_duration_ms", "scr_count",   "scr_mean_rise_s", "pupil_dilation_pct",
    "alpha_power",      "theta_power", "heart_rate_bpm",  "temp_c"};

// Named lookup used by scoring scripts; nullopt for an absent value.
std::optional<double> metric_value(const MetricRow& row, std::string_view column);

struct MetricParams {
    ScrParams scr;
    kernels::WelchParams welch;
    double epoch_s = 2.0;
    double epoch_hop_s = 0.25;
    HeartParams heart;
};

// Receiver-clock interval of the session's pupil baseline: the first
// baseline step found in the marker log.
std::optional<kernels::Interval> find_baseline(std::span<const rec::Event> events);

// Aggregates each symbol's fixations and their attached windows. SCRs are
// detected once per EDA stream and counted when their onset falls inside a
// window. Band power comes from a sliding-epoch timeline averaged over epochs
// centered inside the windows (nearest epoch if none). Heart rate uses
// beat-to-beat intervals ending inside the windows and is omitted when the
// whole recording is flagged unreliable. Pupil dilation needs a baseline.
MetricTable build_metric_table(std::span<const gaze::SymbolHit> hits, const rec::SessionData& recording,
                               std::optional<kernels::Interval> baseline, const MetricParams& params = {});

std::string render_metric_csv(const MetricTable& table);
MetricTable parse_metric_csv(std::string_view text);

}  // namespace cogtrace::physio
