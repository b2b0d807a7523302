#include "cogtrace/stream_net/stream_types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cogtrace/common/error.hpp"

namespace cogtrace::net {

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::Gaze: return "Gaze";
        case Modality::EEG: return "EEG";
        case Modality::EDA: return "EDA";
        case Modality::PPG: return "PPG";
        case Modality::Temperature: return "Temperature";
        case Modality::Marker: return "Marker";
    }
    return "Marker";
}

std::optional<Modality> parse_modality(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "gaze") return Modality::Gaze;
    if (lower == "eeg") return Modality::EEG;
    if (lower == "eda") return Modality::EDA;
    if (lower == "ppg") return Modality::PPG;
    if (lower == "temperature" || lower == "temp") return Modality::Temperature;
    if (lower == "marker" || lower == "markers") return Modality::Marker;
    return std::nullopt;
}

void validate(const StreamInfo& info) {
    if (info.source_id.empty()) throw ProtocolError("stream has empty source_id");
    if (info.channel_count == 0)
        throw ProtocolError("stream " + info.source_id + " has zero channels");
    if (info.channel_labels.size() != info.channel_count)
        throw ProtocolError("stream " + info.source_id + " channel label count mismatch");
    if (!(info.nominal_rate >= 0.0) || !std::isfinite(info.nominal_rate))
        throw ProtocolError("stream " + info.source_id + " has invalid nominal rate");
}

void validate(const Chunk& chunk) {
    if (chunk.samples.empty()) throw ProtocolError("empty chunk for " + chunk.stream_id);
    const auto channels = chunk.samples.front().values.size();
    if (channels == 0) throw ProtocolError("chunk samples carry no values");
    for (const auto& s : chunk.samples) {
        if (s.values.size() != channels) throw ProtocolError("ragged chunk in " + chunk.stream_id);
        if (!std::isfinite(s.timestamp)) throw ProtocolError("non-finite timestamp");
        for (float v : s.values)
            if (!std::isfinite(v)) throw ProtocolError("non-finite sample value");
    }
}

}  // namespace cogtrace::net
