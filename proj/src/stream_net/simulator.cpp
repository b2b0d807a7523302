#include "cogtrace/stream_net/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cogtrace/common/error.hpp"

namespace cogtrace::net {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

StreamInfo make_info(std::string name, Modality m, double rate, std::vector<std::string> labels,
                     std::string source_id) {
    StreamInfo info;
    info.name = std::move(name);
    info.modality = m;
    info.nominal_rate = rate;
    info.channel_count = static_cast<std::uint32_t>(labels.size());
    info.channel_labels = std::move(labels);
    info.source_id = std::move(source_id);
    return info;
}

Sample invalid_gaze(double t) { return {t, {-1.0f, -1.0f, 0.0f, 0.0f}}; }

}  // namespace

StreamInfo gaze_stream_info(std::string source_id, double rate) {
    return make_info("SimulatedEyeTracker", Modality::Gaze, rate,
                     {"x_px", "y_px", "pupil_left_mm", "pupil_right_mm"}, std::move(source_id));
}

StreamInfo eeg_stream_info(std::string source_id, double rate, std::uint32_t channels) {
    // 10-20 positions of a 14-channel consumer headset; extra channels are numbered.
    static const char* kNames[] = {"AF3", "F7", "F3", "FC5", "T7", "P7", "O1",
                                   "O2",  "P8", "T8", "FC6", "F4", "F8", "AF4"};
    std::vector<std::string> labels;
    for (std::uint32_t c = 0; c < channels; ++c)
        labels.push_back(c < 14 ? kNames[c] : "CH" + std::to_string(c + 1));
    return make_info("SimulatedEEG", Modality::EEG, rate, std::move(labels), std::move(source_id));
}

StreamInfo eda_stream_info(std::string source_id, double rate) {
    return make_info("SimulatedEDA", Modality::EDA, rate, {"eda_us"}, std::move(source_id));
}

StreamInfo ppg_stream_info(std::string source_id, double rate) {
    return make_info("SimulatedPPG", Modality::PPG, rate, {"ppg"}, std::move(source_id));
}

StreamInfo temperature_stream_info(std::string source_id, double rate) {
    return make_info("SimulatedSkinTemperature", Modality::Temperature, rate, {"temp_c"},
                     std::move(source_id));
}

StreamInfo marker_stream_info(std::string source_id) {
    return make_info("Markers", Modality::Marker, 0.0, {"code"}, std::move(source_id));
}

std::vector<DeviceProfile> default_device_set(std::uint64_t seed) {
    std::vector<DeviceProfile> set(5);
    set[0].info = gaze_stream_info("sim-gaze");
    set[1].info = eeg_stream_info("sim-eeg");
    set[2].info = eda_stream_info("sim-eda");
    set[3].info = ppg_stream_info("sim-ppg");
    set[4].info = temperature_stream_info("sim-temp");
    for (std::size_t i = 0; i < set.size(); ++i) set[i].seed = seed * 16 + i + 1;
    return set;
}

DeviceSimulator::DeviceSimulator(DeviceProfile profile)
    : profile_(std::move(profile)), rng_(profile_.seed) {
    validate(profile_.info);
    const auto& info = profile_.info;
    const bool irregular = info.modality == Modality::Marker;
    if (irregular != (info.nominal_rate == 0.0))
        throw ConfigError("unsupported modality configuration for " + info.source_id +
                          ": only Marker streams may be irregular");
    auto need_channels = [&](std::uint32_t n) {
        if (info.channel_count != n)
            throw ConfigError("unsupported channel layout for " + info.source_id);
    };
    switch (info.modality) {
        case Modality::Gaze: need_channels(4); break;
        case Modality::EDA:
        case Modality::PPG:
        case Modality::Temperature:
        case Modality::Marker: need_channels(1); break;
        case Modality::EEG: break;
    }
    if (info.modality == Modality::Gaze && profile_.gaze.source == GazeSource::Pointer &&
        !profile_.gaze.pointer)
        throw ConfigError("pointer gaze source without a pointer for " + info.source_id);

    const double t0 = profile_.start_time;
    if (info.modality == Modality::EEG) {
        for (std::uint32_t c = 0; c < info.channel_count; ++c) {
            alpha_phase_.push_back(kTwoPi * uniform_(rng_));
            theta_phase_.push_back(kTwoPi * uniform_(rng_));
        }
    }
    if (info.modality == Modality::EDA) {
        const double rate = profile_.eda.scr_per_minute / 60.0;
        next_scr_ = rate > 0.0 ? t0 + std::exponential_distribution<double>(rate)(rng_)
                               : std::numeric_limits<double>::infinity();
    }
    if (info.modality == Modality::PPG) next_beat_ = t0 + 0.5 * uniform_(rng_);
    prev_x_ = profile_.gaze.area.x + profile_.gaze.area.width / 2.0;
    prev_y_ = profile_.gaze.area.y + profile_.gaze.area.height / 2.0;
    fix_x_ = prev_x_;
    fix_y_ = prev_y_;
    fix_end_ = t0 - 1.0;
}

std::vector<Sample> DeviceSimulator::generate_until(double sender_until) {
    std::vector<Sample> out;
    const auto& info = profile_.info;
    if (info.modality == Modality::Marker) {
        const auto& events = profile_.markers;
        while (marker_index_ < events.size() &&
               profile_.start_time + events[marker_index_].at_s < sender_until) {
            const auto& ev = events[marker_index_++];
            out.push_back({profile_.start_time + ev.at_s, {ev.code}});
            ++index_;
        }
        return out;
    }
    const double rate = info.nominal_rate;
    while (true) {
        const double t = profile_.start_time + static_cast<double>(index_) / rate;
        if (!(t < sender_until)) break;
        out.push_back(make_sample(t));
        ++index_;
    }
    return out;
}

Sample DeviceSimulator::make_sample(double t) {
    switch (profile_.info.modality) {
        case Modality::Gaze: return gaze_sample(t);
        case Modality::EEG: return eeg_sample(t);
        case Modality::EDA: return eda_sample(t);
        case Modality::PPG: return ppg_sample(t);
        case Modality::Temperature: return temperature_sample(t);
        case Modality::Marker: break;
    }
    throw ConfigError("unsupported modality");
}

Sample DeviceSimulator::gaze_sample(double t) {
    const auto& g = profile_.gaze;
    const double rel = t - profile_.start_time;
    const double pupil =
        g.pupil_mm + 0.1 * std::sin(kTwoPi * rel / 20.0) + 0.02 * normal_(rng_);
    auto valid = [&](double x, double y) {
        return Sample{t, {static_cast<float>(x), static_cast<float>(y), static_cast<float>(pupil),
                          static_cast<float>(pupil + 0.05)}};
    };

    if (g.source == GazeSource::Pointer) {
        auto p = g.pointer(t);
        if (!p) return invalid_gaze(t);
        return valid(p->x, p->y);
    }

    if (g.source == GazeSource::Scripted) {
        double acc = 0.0;
        for (const auto& seg : g.script) {
            if (rel < acc + seg.duration_s) {
                const auto& a = seg.area;
                const double cx = a.x + a.width / 2.0, cy = a.y + a.height / 2.0;
                const double jx = std::clamp(g.jitter_px * normal_(rng_), -a.width / 2.0, a.width / 2.0);
                const double jy =
                    std::clamp(g.jitter_px * normal_(rng_), -a.height / 2.0, a.height / 2.0);
                return valid(cx + jx, cy + jy);
            }
            acc += seg.duration_s;
        }
        return invalid_gaze(t);
    }

    if (t >= fix_end_) {
        prev_x_ = fix_x_;
        prev_y_ = fix_y_;
        fix_x_ = g.area.x + g.area.width * uniform_(rng_);
        fix_y_ = g.area.y + g.area.height * uniform_(rng_);
        const double extra =
            std::exponential_distribution<double>(1.0 / g.fixation_mean_extra_s)(rng_);
        saccade_left_ = 2;
        fix_end_ = t + g.fixation_min_s + extra;
    }
    if (saccade_left_ > 0) {
        const double frac = saccade_left_ == 2 ? 1.0 / 3.0 : 2.0 / 3.0;
        --saccade_left_;
        return valid(prev_x_ + frac * (fix_x_ - prev_x_), prev_y_ + frac * (fix_y_ - prev_y_));
    }
    if (uniform_(rng_) < g.blink_probability) return invalid_gaze(t);
    return valid(fix_x_ + g.jitter_px * normal_(rng_), fix_y_ + g.jitter_px * normal_(rng_));
}

Sample DeviceSimulator::eeg_sample(double t) {
    const auto& e = profile_.eeg;
    const double rel = t - profile_.start_time;
    Sample s{t, {}};
    s.values.resize(profile_.info.channel_count);
    // Slow amplitude modulation so band power varies over the session.
    const double mod = 1.0 + 0.3 * std::sin(kTwoPi * rel / 45.0);
    for (std::size_t c = 0; c < s.values.size(); ++c) {
        const double v = e.alpha_uv * mod * std::sin(kTwoPi * e.alpha_hz * rel + alpha_phase_[c]) +
                         e.theta_uv * std::sin(kTwoPi * e.theta_hz * rel + theta_phase_[c]) +
                         e.noise_uv * normal_(rng_);
        s.values[c] = static_cast<float>(v);
    }
    return s;
}

Sample DeviceSimulator::eda_sample(double t) {
    const auto& e = profile_.eda;
    const double rel = t - profile_.start_time;
    while (next_scr_ <= t) {
        scrs_.push_back({next_scr_, e.scr_amplitude_us * (0.5 + uniform_(rng_))});
        next_scr_ += std::exponential_distribution<double>(e.scr_per_minute / 60.0)(rng_);
    }
    while (!scrs_.empty() && t - scrs_.front().onset > e.rise_s + 12.0 * e.decay_tau_s)
        scrs_.pop_front();
    double phasic = 0.0;
    for (const auto& scr : scrs_) {
        const double dt = t - scr.onset;
        if (dt < 0.0) continue;
        if (dt < e.rise_s)
            phasic += scr.amplitude * 0.5 * (1.0 - std::cos(std::numbers::pi * dt / e.rise_s));
        else
            phasic += scr.amplitude * std::exp(-(dt - e.rise_s) / e.decay_tau_s);
    }
    const double tonic = e.tonic_us + 0.05 * std::sin(kTwoPi * rel / 240.0);
    return {t, {static_cast<float>(tonic + phasic + e.noise_us * normal_(rng_))}};
}

Sample DeviceSimulator::ppg_sample(double t) {
    const auto& p = profile_.ppg;
    const double mean_ibi = 60.0 / p.heart_rate_bpm;
    while (next_beat_ <= t + 1.0) {
        beats_.push_back(next_beat_);
        next_beat_ += std::max(0.3, mean_ibi + p.ibi_sd_s * normal_(rng_));
    }
    while (!beats_.empty() && beats_.front() < t - 1.0) beats_.pop_front();
    double v = 0.0;
    for (double b : beats_) {
        const double d1 = (t - b) / 0.08;
        const double d2 = (t - b - 0.3) / 0.1;
        v += std::exp(-0.5 * d1 * d1) + 0.3 * std::exp(-0.5 * d2 * d2);
    }
    return {t, {static_cast<float>(v + p.noise * normal_(rng_))}};
}

Sample DeviceSimulator::temperature_sample(double t) {
    const auto& p = profile_.temperature;
    const double rel = t - profile_.start_time;
    const double v = p.mean_c + 0.2 * std::sin(kTwoPi * rel / 600.0) + p.noise_c * normal_(rng_);
    return {t, {static_cast<float>(v)}};
}

std::vector<Sample> run_simulator(const DeviceProfile& profile, double duration) {
    DeviceSimulator sim(profile);
    return sim.generate_until(profile.start_time + duration);
}

}  // namespace cogtrace::net
