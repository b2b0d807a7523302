#include "cogtrace/recorder/clock_correction.hpp"

#include <algorithm>

#include "cogtrace/common/error.hpp"

namespace cogtrace::rec {

double interpolate_offset(std::span<const net::ClockOffsetEstimate> history, double t) {
    if (history.empty()) throw RecorderError("empty clock offset history");
    if (t <= history.front().measured_at) return history.front().offset;
    if (t >= history.back().measured_at) return history.back().offset;
    auto hi = std::upper_bound(history.begin(), history.end(), t,
                               [](double v, const auto& e) { return v < e.measured_at; });
    auto lo = hi - 1;
    const double span = hi->measured_at - lo->measured_at;
    if (span <= 0.0) return hi->offset;
    const double w = (t - lo->measured_at) / span;
    return lo->offset + w * (hi->offset - lo->offset);
}

std::vector<net::Sample> correct_timestamps(std::span<const net::Sample> samples,
                                            std::span<const net::ClockOffsetEstimate> history) {
    if (history.empty()) throw RecorderError("empty clock offset history");
    if (!std::is_sorted(history.begin(), history.end(),
                        [](const auto& a, const auto& b) { return a.measured_at < b.measured_at; }))
        throw RecorderError("clock offset history not sorted");
    std::vector<net::Sample> out(samples.begin(), samples.end());
    for (auto& s : out) s.timestamp += interpolate_offset(history, s.timestamp);
    return out;
}

}  // namespace cogtrace::rec
