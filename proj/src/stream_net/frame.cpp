#include "cogtrace/stream_net/frame.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <limits>

#include "cogtrace/common/error.hpp"

namespace cogtrace::net {

namespace {

constexpr std::array<std::byte, 4> kMagic{std::byte{'C'}, std::byte{'T'}, std::byte{'S'},
                                          std::byte{'F'}};

class Writer {
public:
    explicit Writer(std::vector<std::byte>& out) : out_(out) {}

    template <typename U>
    void uint(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i)
            out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
    void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::span<const std::byte> b) { out_.insert(out_.end(), b.begin(), b.end()); }

private:
    std::vector<std::byte>& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::byte> in) : in_(in) {}

    template <typename U>
    U uint() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }
    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
    std::span<const std::byte> bytes(std::size_t n) {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw ProtocolError("truncated frame");
    }
    std::span<const std::byte> in_;
    std::size_t pos_ = 0;
};

std::uint32_t peek_u32(std::span<const std::byte> b) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(std::to_integer<std::uint8_t>(b[i])) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::byte> encode_chunk(const Chunk& chunk) {
    validate(chunk);
    if (chunk.stream_id.size() > std::numeric_limits<std::uint16_t>::max())
        throw ProtocolError("stream_id too long");
    const auto channels = chunk.samples.front().values.size();
    const std::size_t body = 4 + 2 + 2 + chunk.stream_id.size() + 4 + 4 +
                             chunk.samples.size() * (8 + 4 * channels);
    if (body > kMaxFrameBytes) throw ProtocolError("chunk exceeds maximum frame size");

    std::vector<std::byte> out;
    out.reserve(body + 4);
    Writer w(out);
    w.uint(static_cast<std::uint32_t>(body));
    w.bytes(kMagic);
    w.uint(kFrameVersion);
    w.uint(static_cast<std::uint16_t>(chunk.stream_id.size()));
    w.bytes(std::as_bytes(std::span(chunk.stream_id.data(), chunk.stream_id.size())));
    w.uint(static_cast<std::uint32_t>(chunk.samples.size()));
    w.uint(static_cast<std::uint32_t>(channels));
    for (const auto& s : chunk.samples) {
        w.f64(s.timestamp);
        for (float v : s.values) w.f32(v);
    }
    return out;
}

Chunk decode_chunk(std::span<const std::byte> frame) {
    Reader r(frame);
    const auto length = r.uint<std::uint32_t>();
    if (length != r.remaining()) throw ProtocolError("frame length mismatch");
    auto magic = r.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw ProtocolError("bad frame magic");
    const auto version = r.uint<std::uint16_t>();
    if (version != kFrameVersion) throw ProtocolError("unsupported frame version");
    const auto id_len = r.uint<std::uint16_t>();
    auto id = r.bytes(id_len);

    Chunk chunk;
    chunk.stream_id.assign(reinterpret_cast<const char*>(id.data()), id.size());
    const auto count = r.uint<std::uint32_t>();
    const auto channels = r.uint<std::uint32_t>();
    if (count == 0 || channels == 0) throw ProtocolError("frame carries no samples");
    if (r.remaining() != static_cast<std::size_t>(count) * (8 + 4 * std::size_t{channels}))
        throw ProtocolError("frame payload size mismatch");
    chunk.samples.resize(count);
    for (auto& s : chunk.samples) {
        s.timestamp = r.f64();
        s.values.resize(channels);
        for (auto& v : s.values) v = r.f32();
    }
    validate(chunk);
    return chunk;
}

void FrameReader::feed(std::span<const std::byte> bytes) {
    if (consumed_ > 0 && consumed_ == buffer_.size()) {
        buffer_.clear();
        consumed_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Chunk> FrameReader::next() {
    std::span<const std::byte> pending(buffer_.data() + consumed_, buffer_.size() - consumed_);
    if (pending.size() < 4) return std::nullopt;
    const auto length = peek_u32(pending);
    if (length > kMaxFrameBytes) throw ProtocolError("oversized frame on stream");
    if (pending.size() < 4 + std::size_t{length}) return std::nullopt;
    auto chunk = decode_chunk(pending.first(4 + length));
    consumed_ += 4 + length;
    if (consumed_ > (1u << 20) && consumed_ * 2 > buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(consumed_));
        consumed_ = 0;
    }
    return chunk;
}

}  // namespace cogtrace::net
