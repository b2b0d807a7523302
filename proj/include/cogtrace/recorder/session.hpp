#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "cogtrace/stream_net/clock_sync.hpp"
#include "cogtrace/stream_net/stream_types.hpp"

namespace cogtrace::rec {

// Samples of one stream whose timestamps may run backwards by at most this
// much before append rejects them.
inline constexpr double kRegressionTolerance = 1e-3;

struct Event {
    double receiver_time = 0.0;
    std::string kind;
    std::string label;

    bool operator==(const Event&) const = default;
};

struct Response {
    std::string step_id;
    std::string item_id;
    std::string value;

    bool operator==(const Response&) const = default;
};

struct StreamRecord {
    net::StreamInfo info;
    std::vector<net::Sample> samples;
    std::vector<net::ClockOffsetEstimate> offsets;  // sorted by measured_at

    bool operator==(const StreamRecord&) const = default;
};

struct SessionIdentity {
    std::string session_id;
    std::string participant_id;  // pseudonymous
    std::string started_at;      // wall clock, ISO 8601

    bool operator==(const SessionIdentity&) const = default;
};

struct ManifestStream {
    net::StreamInfo info;
    std::string file;  // relative to the session directory
    std::uint64_t sample_count = 0;
    std::uint64_t bytes = 0;

    bool operator==(const ManifestStream&) const = default;
};

struct SessionManifest {
    SessionIdentity identity;
    std::vector<ManifestStream> streams;
    double duration_s = 0.0;
    std::uint64_t total_bytes = 0;  // sum of stream file sizes

    bool operator==(const SessionManifest&) const = default;
};

// Plain-value copy of a session, used for analysis and persistence roundtrips.
struct SessionData {
    SessionIdentity identity;
    std::vector<StreamRecord> streams;  // registration order
    std::vector<Event> events;
    std::vector<Response> responses;
    bool corrected = false;  // timestamps already on the receiver clock

    const StreamRecord* find(std::string_view source_id) const;
    bool operator==(const SessionData&) const = default;
};

// Thread-safe recording buffer. Appends to different streams run in
// parallel; appends to one stream are serialized; finalize is exclusive.
class RecordingSession {
public:
    RecordingSession(SessionIdentity identity, std::span<const net::StreamInfo> streams);
    RecordingSession(const RecordingSession&) = delete;
    RecordingSession& operator=(const RecordingSession&) = delete;

    const SessionIdentity& identity() const noexcept { return identity_; }
    std::vector<std::string> stream_ids() const;
    bool has_stream(std::string_view id) const;

    void append(std::string_view stream_id, const net::Chunk& chunk);
    void add_offset(std::string_view stream_id, const net::ClockOffsetEstimate& estimate);
    void log_event(Event event);
    void add_response(Response response);

    std::size_t sample_count(std::string_view stream_id) const;
    bool finalized() const;

    // Deep copy of the current contents (raw timestamps until finalized).
    SessionData snapshot() const;

    // Applies clock correction and writes the session directory. A second
    // call throws RecorderError.
    SessionManifest finalize(const std::filesystem::path& directory);

private:
    struct Buffer {
        mutable std::mutex mutex;
        StreamRecord record;
    };
    Buffer& buffer(std::string_view id) const;

    SessionIdentity identity_;
    std::vector<std::unique_ptr<Buffer>> buffers_;
    std::map<std::string, Buffer*, std::less<>> by_id_;
    mutable std::shared_mutex lifecycle_;
    mutable std::mutex log_mutex_;
    std::vector<Event> events_;
    std::vector<Response> responses_;
    bool finalized_ = false;
};

// start_recording: rejects an empty stream list or duplicate source ids.
std::unique_ptr<RecordingSession> start_recording(SessionIdentity identity,
                                                  std::span<const net::StreamInfo> streams);

// Corrects every stream that has an offset history; streams without one
// (recorded on the receiver clock already) are left untouched.
SessionData corrected(SessionData data);

// Session directory I/O. write_session never overwrites an existing manifest.
SessionManifest write_session(const SessionData& data, const std::filesystem::path& directory);
SessionData load_session(const std::filesystem::path& directory);
SessionManifest load_manifest(const std::filesystem::path& directory);

std::string render_manifest(const SessionManifest& manifest);
SessionManifest parse_manifest(std::string_view text);

}  // namespace cogtrace::rec
