#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "cogtrace/stream_net/stream_types.hpp"

namespace cogtrace::net {

struct Rect {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    bool contains(double px, double py) const noexcept {
        return px >= x && px <= x + width && py >= y && py <= y + height;
    }
    bool operator==(const Rect&) const = default;
};

struct DwellSegment {
    Rect area;
    double duration_s = 0.0;
};

struct MarkerEvent {
    double at_s = 0.0;  // seconds after simulator start
    float code = 0.0f;
};

struct PointerPosition {
    double x = 0.0;
    double y = 0.0;
};

// Mouse-as-gaze: returns the pointer position at a sender-clock time, or
// nullopt when the pointer is unavailable.
using PointerSource = std::function<std::optional<PointerPosition>(double)>;

enum class GazeSource : std::uint8_t { Synthetic, Scripted, Pointer };

struct GazeParams {
    GazeSource source = GazeSource::Synthetic;
    Rect area{100.0, 50.0, 800.0, 600.0};  // where synthetic fixations land
    double fixation_min_s = 0.15;
    double fixation_mean_extra_s = 0.35;
    double jitter_px = 2.0;
    double blink_probability = 0.002;  // per fixation sample
    double pupil_mm = 3.2;
    std::vector<DwellSegment> script;
    PointerSource pointer;
};

struct EegParams {
    double alpha_hz = 10.0;
    double alpha_uv = 10.0;
    double theta_hz = 6.0;
    double theta_uv = 6.0;
    double noise_uv = 4.0;
};

struct EdaParams {
    double tonic_us = 2.0;
    double scr_per_minute = 4.0;
    double scr_amplitude_us = 0.15;
    double rise_s = 1.5;
    double decay_tau_s = 3.0;
    double noise_us = 0.002;
};

struct PpgParams {
    double heart_rate_bpm = 70.0;
    double ibi_sd_s = 0.03;
    double noise = 0.02;
};

struct TemperatureParams {
    double mean_c = 33.5;
    double noise_c = 0.01;
};

// Sender clock relative to the receiver: sender = receiver * (1 + drift) - offset.
struct ClockModel {
    double offset_s = 0.0;
    double drift_ppm = 0.0;

    double sender_time(double receiver_time) const noexcept {
        return receiver_time * (1.0 + drift_ppm * 1e-6) - offset_s;
    }
    double receiver_time(double sender_time) const noexcept {
        return (sender_time + offset_s) / (1.0 + drift_ppm * 1e-6);
    }
};

struct DeviceProfile {
    StreamInfo info;
    std::uint64_t seed = 0;
    double start_time = 0.0;  // sender clock time of sample 0
    ClockModel clock;
    GazeParams gaze;
    EegParams eeg;
    EdaParams eda;
    PpgParams ppg;
    TemperatureParams temperature;
    std::vector<MarkerEvent> markers;
};

// Canonical descriptors for each simulated modality.
StreamInfo gaze_stream_info(std::string source_id, double rate = 60.0);
StreamInfo eeg_stream_info(std::string source_id, double rate = 128.0, std::uint32_t channels = 14);
StreamInfo eda_stream_info(std::string source_id, double rate = 128.0);
StreamInfo ppg_stream_info(std::string source_id, double rate = 64.0);
StreamInfo temperature_stream_info(std::string source_id, double rate = 4.0);
StreamInfo marker_stream_info(std::string source_id);

// Gaze 60 Hz x4, EEG 128 Hz x14, EDA 128 Hz, PPG 64 Hz, temperature 4 Hz.
std::vector<DeviceProfile> default_device_set(std::uint64_t seed);

// Gaze channel layout: x_px, y_px, pupil_left_mm, pupil_right_mm.
// A sample whose pupils are both 0 marks lost tracking (blink/dropout).
inline constexpr std::size_t kGazeX = 0;
inline constexpr std::size_t kGazeY = 1;
inline constexpr std::size_t kGazePupilLeft = 2;
inline constexpr std::size_t kGazePupilRight = 3;

// Incremental, deterministic generator. The emitted sequence depends only on
// the profile (incl. seed), never on how generation is split into calls.
class DeviceSimulator {
public:
    // Throws ConfigError for modality/rate/channel combinations it cannot emit.
    explicit DeviceSimulator(DeviceProfile profile);

    const DeviceProfile& profile() const noexcept { return profile_; }

    // All samples with sender timestamp < until, not yet emitted.
    std::vector<Sample> generate_until(double sender_until);

    std::uint64_t emitted() const noexcept { return index_; }

private:
    Sample make_sample(double t);
    Sample gaze_sample(double t);
    Sample eeg_sample(double t);
    Sample eda_sample(double t);
    Sample ppg_sample(double t);
    Sample temperature_sample(double t);

    DeviceProfile profile_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::uint64_t index_ = 0;
    std::size_t marker_index_ = 0;

    // gaze
    double fix_x_ = 0.0, fix_y_ = 0.0, fix_end_ = -1.0;
    double prev_x_ = 0.0, prev_y_ = 0.0;
    int saccade_left_ = 0;
    // eeg
    std::vector<double> alpha_phase_, theta_phase_;
    // eda
    struct Scr {
        double onset, amplitude;
    };
    std::deque<Scr> scrs_;
    double next_scr_ = 0.0;
    // ppg
    std::deque<double> beats_;
    double next_beat_ = 0.0;
};

// Emitted stream for `duration` seconds from the profile's start time.
std::vector<Sample> run_simulator(const DeviceProfile& profile, double duration);

}  // namespace cogtrace::net
