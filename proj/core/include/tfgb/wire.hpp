// Copyright 2026 The tfgb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Frame format, version 0x01. All header integers are little-endian.
//
//   offset  size  field
//   0       4     magic "TFGB"
//   4       1     version (0x01)
//   5       1     msg_type
//   6       1     mode (0x00 non-serialized, 0x01 serialized)
//   7       1     reserved (0x00)
//   8       8     request_id
//   16      8     body_length
//   24      ...   body
//
// Non-serialized body: u32le buffer_count, then per buffer u32le length and
// the raw bytes. Serialized body: per buffer the tag byte 0x0A, the LEB128
// length, and the bytes. ACK bodies are empty in both modes.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tfgb/workload.hpp"

namespace tfgb {

inline constexpr std::size_t kHeaderSize = 24;
inline constexpr std::array<std::uint8_t, 4> kMagic = {'T', 'F', 'G', 'B'};
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::uint8_t kSerializedTag = 0x0A;
// Largest buffer the decoder accepts: the Large category ceiling.
inline constexpr std::uint64_t kMaxDecodedBuffer = kLargeMax;

enum class MsgType : std::uint8_t {
  EchoReq = 0x01,
  EchoResp = 0x02,
  PutReq = 0x03,
  Ack = 0x04,
  GetReq = 0x05,
  GetResp = 0x06,
};

enum class WireMode : std::uint8_t {
  NonSerialized = 0x00,
  Serialized = 0x01,
};

std::string_view to_string(MsgType t);
std::string_view to_string(WireMode m);
std::optional<WireMode> parse_mode(std::string_view s);

struct FrameHeader {
  MsgType type = MsgType::EchoReq;
  WireMode mode = WireMode::NonSerialized;
  std::uint64_t request_id = 0;
  std::uint64_t body_length = 0;

  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

std::array<std::uint8_t, kHeaderSize> encode_header(const FrameHeader& h);
// Throws ProtocolError on bad magic, version, msg_type, mode or reserved byte.
FrameHeader parse_header(std::span<const std::uint8_t, kHeaderSize> bytes);

// A frame ready for a vectored write. Small framing bytes live in an owned
// scratch area; payload segments point at the caller's buffers, which must
// outlive the list. Move-only because segments point into scratch.
class SegmentList {
 public:
  SegmentList() = default;
  SegmentList(const SegmentList&) = delete;
  SegmentList& operator=(const SegmentList&) = delete;
  SegmentList(SegmentList&&) noexcept = default;
  SegmentList& operator=(SegmentList&&) noexcept = default;

  const FrameHeader& header() const { return header_; }
  std::span<const BufferView> segments() const { return segments_; }
  std::uint64_t size() const { return kHeaderSize + header_.body_length; }
  // Contiguous copy of the frame; tests and diagnostics only.
  Buffer flatten() const;

 private:
  friend SegmentList encode_nonserialized(std::span<const BufferView>, MsgType, std::uint64_t);
  friend SegmentList encode_frame(WireMode, std::span<const BufferView>, MsgType, std::uint64_t);

  FrameHeader header_;
  Buffer scratch_;
  std::vector<BufferView> segments_;
};

// Zero-copy: payload segments reference `buffers` directly.
SegmentList encode_nonserialized(std::span<const BufferView> buffers, MsgType type, std::uint64_t request_id);
// One contiguous allocation holding header and TLV body.
Buffer encode_serialized(std::span<const BufferView> buffers, MsgType type, std::uint64_t request_id);
// Mode dispatch; a serialized frame becomes a single owned segment.
SegmentList encode_frame(WireMode mode, std::span<const BufferView> buffers, MsgType type,
                         std::uint64_t request_id);

// Bytes a frame adds on top of its buffer contents (header and body prefixes).
std::uint64_t framing_overhead(WireMode mode, MsgType type, std::span<const std::uint64_t> buffer_lengths);

std::size_t varint_size(std::uint64_t v);
void put_varint(Buffer& out, std::uint64_t v);

struct Message {
  FrameHeader header;
  std::vector<Buffer> buffers;
};

// Blocking reader of exact byte counts.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  // Fills `out` completely or throws.
  virtual void read_exact(std::span<std::uint8_t> out) = 0;
  // Upper bound on bytes still obtainable; unbounded for live streams.
  virtual std::uint64_t available_hint() const { return UINT64_MAX; }
};

// ByteSource over an in-memory span; reading past the end throws
// TruncationError.
class SpanSource final : public ByteSource {
 public:
  explicit SpanSource(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  void read_exact(std::span<std::uint8_t> out) override;
  std::uint64_t available_hint() const override { return bytes_.size() - pos_; }
  std::size_t consumed() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Reads exactly one frame (header + body_length bytes) from `src`.
Message read_message(ByteSource& src);
// Decodes the frame at the start of `bytes`; trailing bytes are ignored.
Message decode(std::span<const std::uint8_t> bytes);

}  // namespace tfgb
