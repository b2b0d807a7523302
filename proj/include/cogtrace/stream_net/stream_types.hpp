#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cogtrace::net {

enum class Modality : std::uint8_t { Gaze, EEG, EDA, PPG, Temperature, Marker };

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view s);  // case-insensitive

struct StreamInfo {
    std::string name;
    Modality modality = Modality::Marker;
    std::uint32_t channel_count = 0;
    double nominal_rate = 0.0;  // Hz; 0 for irregular streams
    std::vector<std::string> channel_labels;
    std::string source_id;

    bool operator==(const StreamInfo&) const = default;
};

// Throws ProtocolError when the descriptor breaks an invariant.
void validate(const StreamInfo& info);

// One multichannel reading on the sender's local monotonic clock.
struct Sample {
    double timestamp = 0.0;
    std::vector<float> values;

    bool operator==(const Sample&) const = default;
};

struct Chunk {
    std::string stream_id;
    std::vector<Sample> samples;

    bool operator==(const Chunk&) const = default;
};

// Throws ProtocolError on an empty chunk, ragged channel counts or
// non-finite numbers.
void validate(const Chunk& chunk);

}  // namespace cogtrace::net
