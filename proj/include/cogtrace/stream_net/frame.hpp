#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cogtrace/stream_net/stream_types.hpp"

namespace cogtrace::net {

// Sample frame, all integers and floats little-endian:
//
//   u32  frame_length      bytes that follow this field
//   u8[4] magic            "CTSF"
//   u16  version           kFrameVersion
//   u16  id_length         L
//   u8[L] stream_id        UTF-8, not terminated
//   u32  sample_count      N >= 1
//   u32  channel_count     C >= 1
//   N x { f64 timestamp, C x f32 value }
//
// See docs/protocol.md.
inline constexpr std::uint16_t kFrameVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 64u << 20;

std::vector<std::byte> encode_chunk(const Chunk& chunk);

// Decodes exactly one complete frame; trailing bytes are an error.
Chunk decode_chunk(std::span<const std::byte> frame);

// Incremental splitter for a byte stream carrying back-to-back frames.
class FrameReader {
public:
    void feed(std::span<const std::byte> bytes);
    // Next complete chunk, or nullopt when more bytes are needed.
    std::optional<Chunk> next();
    std::size_t buffered() const noexcept { return buffer_.size() - consumed_; }

private:
    std::vector<std::byte> buffer_;
    std::size_t consumed_ = 0;
};

}  // namespace cogtrace::net
