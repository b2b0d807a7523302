#pragma once

// Hand-rolled generators for property tests. Everything is driven by an
// explicit seed so a failing case can be replayed from the printed seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cogtrace/gaze/fixation.hpp"
#include "cogtrace/physio/metrics.hpp"
#include "cogtrace/stream_net/clock_sync.hpp"
#include "cogtrace/stream_net/simulator.hpp"

namespace testgen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    double normal(double sd) { return std::normal_distribution<double>(0.0, sd)(eng_); }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// Gaze at `rate` Hz: planted dwells (small jitter around a target) separated
// by saccades, with occasional blinks (NaN runs) and dropped samples.
struct GazeTrace {
    std::vector<cogtrace::gaze::GazePoint> points;
    int planted = 0;
};

inline GazeTrace gaze_trace(Rng& rng, double rate = 60.0) {
    GazeTrace out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double dt = 1.0 / rate;
    double t = rng.uniform(0.0, 5.0);
    const int segments = rng.integer(1, 12);
    double x = rng.uniform(0, 1600), y = rng.uniform(0, 900);
    for (int s = 0; s < segments; ++s) {
        const int kind = rng.integer(0, 9);
        if (kind <= 5) {  // dwell
            ++out.planted;
            const double cx = rng.uniform(0, 1600), cy = rng.uniform(0, 900);
            const double jitter = rng.uniform(0.5, 12.0);
            const int n = rng.integer(3, 90);
            for (int k = 0; k < n; ++k) {
                if (rng.chance(0.03)) {  // dropped sample
                    t += dt;
                    continue;
                }
                out.points.push_back({t, cx + rng.normal(jitter), cy + rng.normal(jitter)});
                t += dt;
            }
            x = cx;
            y = cy;
        } else if (kind <= 7) {  // saccade / random walk
            const int n = rng.integer(1, 15);
            for (int k = 0; k < n; ++k) {
                x += rng.normal(40.0);
                y += rng.normal(40.0);
                out.points.push_back({t, x, y});
                t += dt;
            }
        } else if (kind == 8) {  // blink
            const int n = rng.integer(1, 12);
            for (int k = 0; k < n; ++k) {
                out.points.push_back({t, nan, nan});
                t += dt;
            }
        } else {  // tracking gap
            t += rng.uniform(0.05, 0.5);
        }
    }
    return out;
}

// Skin conductance response with a bi-exponential shape scaled so that its
// peak equals `amplitude`.
struct PlantedScr {
    double onset = 0.0;
    double amplitude = 0.0;
    double tau_rise = 0.75;
    double tau_decay = 3.0;

    double peak_delay() const {
        return std::log(tau_decay / tau_rise) * tau_rise * tau_decay / (tau_decay - tau_rise);
    }
    double value(double t) const {
        if (t <= onset) return 0.0;
        const double u = t - onset, p = peak_delay();
        const double norm = std::exp(-p / tau_decay) - std::exp(-p / tau_rise);
        return amplitude * (std::exp(-u / tau_decay) - std::exp(-u / tau_rise)) / norm;
    }
};

struct EdaTrace {
    std::vector<double> samples;
    std::vector<PlantedScr> scrs;
    double rate = 128.0;
};

// Clean trace: slowly decaying tonic level plus 0..max_scrs responses at
// least `spacing` seconds apart, amplitudes >= min_amplitude.
inline EdaTrace eda_trace(Rng& rng, double rate, double duration, int max_scrs, double min_amplitude,
                          double max_amplitude, double spacing = 15.0) {
    EdaTrace out;
    out.rate = rate;
    const int count = rng.integer(0, max_scrs);
    double t = rng.uniform(3.0, 8.0);
    for (int k = 0; k < count && t < duration - 10.0; ++k) {
        PlantedScr s;
        s.onset = t;
        s.amplitude = rng.uniform(min_amplitude, max_amplitude);
        s.tau_rise = rng.uniform(0.5, 1.0);
        s.tau_decay = rng.uniform(2.0, 4.0);
        out.scrs.push_back(s);
        t += spacing + rng.uniform(0.0, 3.0);
    }
    // The tonic level falls just enough to make every onset a strict trough
    // while taking well under 1% off a 0.01 uS rise.
    const double tonic = rng.uniform(1.0, 8.0), drift = rng.uniform(0.005, 0.02), tau = rng.uniform(300.0, 600.0);
    const auto n = static_cast<std::size_t>(duration * rate);
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i) / rate;
        double v = tonic + drift * std::exp(-ti / tau);
        for (const auto& s : out.scrs) v += s.value(ti);
        out.samples[i] = v;
    }
    return out;
}

// Probes against a sender whose clock reads receiver + true_offset, with
// one-way delays base + U(0, jitter) drawn independently per direction.
inline std::vector<cogtrace::net::ClockProbe> jittered_probes(Rng& rng, double true_offset, std::size_t count,
                                                              double base_delay, double jitter) {
    std::vector<cogtrace::net::ClockProbe> out;
    double t = rng.uniform(0.0, 100.0);
    for (std::size_t i = 0; i < count; ++i) {
        cogtrace::net::ClockProbe p;
        p.t0 = t;
        const double fwd = base_delay + rng.uniform(0.0, jitter);
        const double back = base_delay + rng.uniform(0.0, jitter);
        const double turnaround = rng.uniform(0.0, 1e-4);
        p.t1 = t + fwd + true_offset;
        p.t2 = p.t1 + turnaround;
        p.t3 = t + fwd + turnaround + back;
        out.push_back(p);
        t += rng.uniform(0.001, 0.05);
    }
    return out;
}

inline std::string symbol_id(const std::string& file, int line) { return file + ":line:" + std::to_string(line) + ":0"; }

// Random metric table: 1..max_rows rows over a few files, dwell values with
// deliberate ties, other columns sometimes missing.
inline cogtrace::physio::MetricTable metric_table(Rng& rng, int max_rows = 60) {
    cogtrace::physio::MetricTable table;
    const int files = rng.integer(1, 4);
    const int rows = rng.integer(1, max_rows);
    std::vector<std::string> ids;
    for (int r = 0; r < rows; ++r) {
        const std::string id = symbol_id("src/F" + std::to_string(rng.integer(0, files - 1)) + ".java", r);
        ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    std::vector<double> pool;
    for (const auto& id : ids) {
        cogtrace::physio::MetricRow row;
        row.symbol_id = id;
        if (!pool.empty() && rng.chance(0.2))
            row.gaze_duration_ms = pool[static_cast<std::size_t>(rng.integer(0, static_cast<int>(pool.size()) - 1))];
        else
            row.gaze_duration_ms = rng.chance(0.1) ? 0.0 : std::round(rng.uniform(100.0, 20000.0) * 1000.0) / 1000.0;
        pool.push_back(row.gaze_duration_ms);
        if (rng.chance(0.8)) row.scr_count = rng.integer(0, 6);
        if (row.scr_count && *row.scr_count > 0) row.scr_mean_rise_s = rng.uniform(0.5, 3.0);
        if (rng.chance(0.7)) row.pupil_dilation_pct = rng.uniform(-20.0, 20.0);
        if (rng.chance(0.8)) row.alpha_power = rng.uniform(0.0, 100.0);
        if (rng.chance(0.8)) row.theta_power = rng.uniform(0.0, 100.0);
        if (rng.chance(0.6)) row.heart_rate_bpm = rng.uniform(50.0, 110.0);
        if (rng.chance(0.6)) row.temp_c = rng.uniform(30.0, 36.0);
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace testgen
