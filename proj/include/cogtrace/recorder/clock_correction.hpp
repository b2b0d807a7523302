#pragma once

#include <span>
#include <vector>

#include "cogtrace/stream_net/clock_sync.hpp"
#include "cogtrace/stream_net/stream_types.hpp"

namespace cogtrace::rec {

// Offset in effect at `t`: linear between neighbouring estimates, held
// constant beyond the first/last one. `history` must be sorted by
// measured_at and non-empty.
double interpolate_offset(std::span<const net::ClockOffsetEstimate> history, double t);

// Moves sender-clock samples onto the receiver clock. Throws RecorderError
// on an empty history.
std::vector<net::Sample> correct_timestamps(std::span<const net::Sample> samples,
                                            std::span<const net::ClockOffsetEstimate> history);

}  // namespace cogtrace::rec
