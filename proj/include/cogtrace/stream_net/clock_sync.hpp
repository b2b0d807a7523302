#pragma once

#include <cstddef>
#include <span>

namespace cogtrace::net {

// One four-timestamp exchange. t0/t3 are read on the receiver clock when the
// probe leaves and the reply arrives; t1/t2 on the sender clock when the
// probe arrives and the reply leaves.
struct ClockProbe {
    double t0 = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;

    double offset() const noexcept { return ((t1 - t0) + (t2 - t3)) / 2.0; }
    double round_trip() const noexcept { return (t3 - t0) - (t2 - t1); }
};

struct ClockOffsetEstimate {
    // In a recorder history: add to a sender timestamp to land on the
    // receiver clock. estimate_clock_offset reports the probe convention
    // (sender minus receiver); receiver_correction flips it.
    double offset = 0.0;
    double round_trip = 0.0;
    double measured_at = 0.0;  // receiver clock, midpoint of the selected exchange

    bool operator==(const ClockOffsetEstimate&) const = default;
};

// Picks the probe with the smallest round trip. Throws ProtocolError on an
// empty list or a probe whose timestamps run backwards.
ClockOffsetEstimate estimate_clock_offset(std::span<const ClockProbe> probes);

// The same estimate expressed as a sender-to-receiver correction.
inline ClockOffsetEstimate receiver_correction(const ClockOffsetEstimate& probe_estimate) {
    return {-probe_estimate.offset, probe_estimate.round_trip, probe_estimate.measured_at};
}

inline constexpr double kProbeIntervalS = 5.0;
inline constexpr std::size_t kProbesPerBurst = 8;

}  // namespace cogtrace::net
