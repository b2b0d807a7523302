#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cogtrace/stream_net/stream_types.hpp"

namespace cogtrace::gaze {

// Gaze position on the receiver clock; NaN coordinates mark lost tracking.
struct GazePoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct FixationParams {
    double dispersion_px = 50.0;
    double min_duration_s = 0.10;
    double max_gap_s = 0.075;

    void validate() const;  // throws ConfigError
};

struct Fixation {
    double start = 0.0;
    double duration = 0.0;
    double x = 0.0;  // centroid
    double y = 0.0;
    std::size_t sample_count = 0;
    std::size_t first_index = 0;  // into the detector input
    std::size_t last_index = 0;   // inclusive

    double end() const noexcept { return start + duration; }
    bool operator==(const Fixation&) const = default;
};

// (max_x - min_x) + (max_y - min_y)
double dispersion(std::span<const GazePoint> window);

// Gaze stream samples to points; lost-tracking samples (both pupils 0)
// become NaN positions.
std::vector<GazePoint> gaze_points(std::span<const net::Sample> samples);

// Dispersion-threshold identification. Lost samples and gaps longer than
// max_gap_s split the trace; within a run the window starts at the earliest
// sample, is seeded with min_duration_s of samples, and grows while the
// dispersion stays within bounds. Throws Error on unordered timestamps.
std::vector<Fixation> detect_fixations(std::span<const GazePoint> points, const FixationParams& params);

}  // namespace cogtrace::gaze
