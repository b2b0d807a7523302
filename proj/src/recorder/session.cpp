#include "cogtrace/recorder/session.hpp"

#include <algorithm>
#include <set>

#include "cogtrace/common/error.hpp"
#include "cogtrace/recorder/clock_correction.hpp"

namespace cogtrace::rec {

const StreamRecord* SessionData::find(std::string_view source_id) const {
    for (const auto& s : streams)
        if (s.info.source_id == source_id) return &s;
    return nullptr;
}

RecordingSession::RecordingSession(SessionIdentity identity,
                                   std::span<const net::StreamInfo> streams)
    : identity_(std::move(identity)) {
    if (streams.empty()) throw RecorderError("recording needs at least one stream");
    for (const auto& info : streams) {
        net::validate(info);
        if (by_id_.count(info.source_id))
            throw RecorderError("duplicate source_id " + info.source_id);
        auto buf = std::make_unique<Buffer>();
        buf->record.info = info;
        by_id_.emplace(info.source_id, buf.get());
        buffers_.push_back(std::move(buf));
    }
}

std::unique_ptr<RecordingSession> start_recording(SessionIdentity identity,
                                                  std::span<const net::StreamInfo> streams) {
    return std::make_unique<RecordingSession>(std::move(identity), streams);
}

RecordingSession::Buffer& RecordingSession::buffer(std::string_view id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw RecorderError("unknown stream " + std::string(id));
    return *it->second;
}

std::vector<std::string> RecordingSession::stream_ids() const {
    std::vector<std::string> ids;
    for (const auto& b : buffers_) ids.push_back(b->record.info.source_id);
    return ids;
}

bool RecordingSession::has_stream(std::string_view id) const { return by_id_.count(id) > 0; }

void RecordingSession::append(std::string_view stream_id, const net::Chunk& chunk) {
    std::shared_lock life(lifecycle_);
    if (finalized_) throw RecorderError("session already finalized");
    auto& buf = buffer(stream_id);
    if (!chunk.stream_id.empty() && chunk.stream_id != stream_id)
        throw RecorderError("chunk for " + chunk.stream_id + " appended to " + std::string(stream_id));
    net::validate(chunk);
    if (chunk.samples.front().values.size() != buf.record.info.channel_count)
        throw RecorderError("channel count mismatch on " + std::string(stream_id));

    std::lock_guard lock(buf.mutex);
    auto& samples = buf.record.samples;
    double prev = samples.empty() ? chunk.samples.front().timestamp : samples.back().timestamp;
    for (const auto& s : chunk.samples) {
        if (s.timestamp < prev - kRegressionTolerance)
            throw RecorderError("timestamp regression on " + std::string(stream_id));
        prev = std::max(prev, s.timestamp);
    }
    samples.insert(samples.end(), chunk.samples.begin(), chunk.samples.end());
}

void RecordingSession::add_offset(std::string_view stream_id,
                                  const net::ClockOffsetEstimate& estimate) {
    std::shared_lock life(lifecycle_);
    if (finalized_) throw RecorderError("session already finalized");
    auto& buf = buffer(stream_id);
    std::lock_guard lock(buf.mutex);
    auto& offsets = buf.record.offsets;
    auto pos = std::upper_bound(offsets.begin(), offsets.end(), estimate.measured_at,
                                [](double t, const auto& e) { return t < e.measured_at; });
    offsets.insert(pos, estimate);
}

void RecordingSession::log_event(Event event) {
    std::shared_lock life(lifecycle_);
    if (finalized_) throw RecorderError("session already finalized");
    std::lock_guard lock(log_mutex_);
    events_.push_back(std::move(event));
}

void RecordingSession::add_response(Response response) {
    std::shared_lock life(lifecycle_);
    if (finalized_) throw RecorderError("session already finalized");
    std::lock_guard lock(log_mutex_);
    responses_.push_back(std::move(response));
}

std::size_t RecordingSession::sample_count(std::string_view stream_id) const {
    auto& buf = buffer(stream_id);
    std::lock_guard lock(buf.mutex);
    return buf.record.samples.size();
}

bool RecordingSession::finalized() const {
    std::shared_lock life(lifecycle_);
    return finalized_;
}

SessionData RecordingSession::snapshot() const {
    std::shared_lock life(lifecycle_);
    SessionData data;
    data.identity = identity_;
    data.corrected = finalized_;
    for (const auto& b : buffers_) {
        std::lock_guard lock(b->mutex);
        data.streams.push_back(b->record);
    }
    std::lock_guard lock(log_mutex_);
    data.events = events_;
    data.responses = responses_;
    return data;
}

SessionManifest RecordingSession::finalize(const std::filesystem::path& directory) {
    std::unique_lock life(lifecycle_);
    if (finalized_) throw RecorderError("session already finalized");
    SessionData data;
    data.identity = identity_;
    for (const auto& b : buffers_) data.streams.push_back(b->record);
    data.events = events_;
    data.responses = responses_;
    data = corrected(std::move(data));
    auto manifest = write_session(data, directory);
    for (std::size_t i = 0; i < buffers_.size(); ++i)
        buffers_[i]->record = std::move(data.streams[i]);
    finalized_ = true;
    return manifest;
}

SessionData corrected(SessionData data) {
    if (data.corrected) return data;
    for (auto& s : data.streams) {
        if (s.offsets.empty()) continue;
        s.samples = correct_timestamps(s.samples, s.offsets);
    }
    data.corrected = true;
    return data;
}

}  // namespace cogtrace::rec
