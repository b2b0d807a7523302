#include "cogtrace/stream_net/clock_sync.hpp"

#include "cogtrace/common/error.hpp"

namespace cogtrace::net {

ClockOffsetEstimate estimate_clock_offset(std::span<const ClockProbe> probes) {
    if (probes.empty()) throw ProtocolError("no clock probes");
    const ClockProbe* best = nullptr;
    for (const auto& p : probes) {
        if (p.t3 < p.t0 || p.t2 < p.t1) throw ProtocolError("clock probe timestamps out of order");
        if (best == nullptr || p.round_trip() < best->round_trip()) best = &p;
    }
    // A negative round trip only happens with inconsistent clocks mid-probe.
    const double rtt = best->round_trip() < 0.0 ? 0.0 : best->round_trip();
    return {best->offset(), rtt, (best->t0 + best->t3) / 2.0};
}

}  // namespace cogtrace::net
