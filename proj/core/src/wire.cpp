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

#include "tfgb/wire.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

#include "tfgb/error.hpp"

namespace tfgb {

namespace {

constexpr std::uint64_t kMaxU32 = std::numeric_limits<std::uint32_t>::max();
// Serialized bodies are pulled off the stream in chunks so a lying
// body_length cannot force a huge up-front allocation.
constexpr std::size_t kReadChunk = 1 << 20;

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

bool known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x06; }

void check_encodable(std::span<const BufferView> buffers, MsgType type) {
  if (type == MsgType::Ack && !buffers.empty()) throw EncodingError("ACK frames carry no buffers");
  if (buffers.size() > kMaxU32) throw EncodingError("buffer count exceeds 32-bit range");
  for (const auto& b : buffers) {
    if (b.size() > kMaxU32) throw EncodingError("buffer length " + std::to_string(b.size()) + " exceeds 32-bit range");
  }
}

std::uint64_t nonserialized_body_length(std::span<const BufferView> buffers, MsgType type) {
  if (type == MsgType::Ack) return 0;
  std::uint64_t n = 4;
  for (const auto& b : buffers) n += 4 + b.size();
  return n;
}

std::vector<Buffer> read_nonserialized_body(ByteSource& src, std::uint64_t body_length) {
  if (body_length < 4) throw MalformedFrameError("non-serialized body shorter than its buffer count");
  std::uint8_t word[4];
  src.read_exact(word);
  std::uint64_t remaining = body_length - 4;
  const std::uint32_t count = get_u32(word);
  if (count > remaining / 4) {
    throw MalformedFrameError("buffer count " + std::to_string(count) + " cannot fit in the body");
  }
  std::vector<Buffer> buffers;
  buffers.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (remaining < 4) throw MalformedFrameError("length prefix runs past body end");
    src.read_exact(word);
    remaining -= 4;
    const std::uint32_t len = get_u32(word);
    if (len > remaining) throw MalformedFrameError("buffer length " + std::to_string(len) + " runs past body end");
    if (len > kMaxDecodedBuffer) throw MalformedFrameError("buffer length " + std::to_string(len) + " above 10 MiB");
    Buffer buf(len);
    src.read_exact(buf);
    remaining -= len;
    buffers.push_back(std::move(buf));
  }
  if (remaining != 0) {
    throw TruncationError("body_length exceeds parsed buffers by " + std::to_string(remaining) + " bytes");
  }
  return buffers;
}

std::vector<Buffer> parse_serialized_body(std::span<const std::uint8_t> body) {
  std::vector<Buffer> buffers;
  std::size_t pos = 0;
  while (pos < body.size()) {
    if (body[pos] != kSerializedTag) throw MalformedFrameError("unexpected field tag in serialized body");
    ++pos;
    std::uint64_t len = 0;
    int shift = 0;
    for (;;) {
      if (pos >= body.size()) throw MalformedFrameError("varint runs past body end");
      if (shift > 28) throw MalformedFrameError("varint longer than 5 bytes");
      const std::uint8_t byte = body[pos++];
      len |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
      if ((byte & 0x80) == 0) break;
      shift += 7;
    }
    if (len > kMaxU32) throw MalformedFrameError("varint length exceeds 32-bit range");
    if (len > body.size() - pos) throw MalformedFrameError("buffer length " + std::to_string(len) + " runs past body end");
    if (len > kMaxDecodedBuffer) throw MalformedFrameError("buffer length " + std::to_string(len) + " above 10 MiB");
    buffers.emplace_back(body.begin() + static_cast<std::ptrdiff_t>(pos),
                         body.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return buffers;
}

}  // namespace

std::string_view to_string(MsgType t) {
  switch (t) {
    case MsgType::EchoReq:
      return "ECHO_REQ";
    case MsgType::EchoResp:
      return "ECHO_RESP";
    case MsgType::PutReq:
      return "PUT_REQ";
    case MsgType::Ack:
      return "ACK";
    case MsgType::GetReq:
      return "GET_REQ";
    case MsgType::GetResp:
      return "GET_RESP";
  }
  return "?";
}

std::string_view to_string(WireMode m) {
  return m == WireMode::Serialized ? "serialized" : "non-serialized";
}

std::optional<WireMode> parse_mode(std::string_view s) {
  if (s == "non-serialized" || s == "nonserialized") return WireMode::NonSerialized;
  if (s == "serialized") return WireMode::Serialized;
  return std::nullopt;
}

std::array<std::uint8_t, kHeaderSize> encode_header(const FrameHeader& h) {
  std::array<std::uint8_t, kHeaderSize> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = kWireVersion;
  out[5] = static_cast<std::uint8_t>(h.type);
  out[6] = static_cast<std::uint8_t>(h.mode);
  out[7] = 0;
  put_u64(out.data() + 8, h.request_id);
  put_u64(out.data() + 16, h.body_length);
  return out;
}

FrameHeader parse_header(std::span<const std::uint8_t, kHeaderSize> bytes) {
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw ProtocolError("bad frame magic");
  if (bytes[4] != kWireVersion) throw ProtocolError("unsupported wire version " + std::to_string(bytes[4]));
  if (!known_type(bytes[5])) throw ProtocolError("unknown msg_type " + std::to_string(bytes[5]));
  if (bytes[6] > 0x01) throw ProtocolError("unknown mode " + std::to_string(bytes[6]));
  if (bytes[7] != 0) throw ProtocolError("reserved header byte is not zero");
  FrameHeader h;
  h.type = static_cast<MsgType>(bytes[5]);
  h.mode = static_cast<WireMode>(bytes[6]);
  h.request_id = get_u64(bytes.data() + 8);
  h.body_length = get_u64(bytes.data() + 16);
  return h;
}

Buffer SegmentList::flatten() const {
  Buffer out;
  out.reserve(size());
  for (const auto& s : segments_) out.insert(out.end(), s.begin(), s.end());
  return out;
}

SegmentList encode_nonserialized(std::span<const BufferView> buffers, MsgType type, std::uint64_t request_id) {
  check_encodable(buffers, type);
  SegmentList list;
  list.header_ = {type, WireMode::NonSerialized, request_id, nonserialized_body_length(buffers, type)};

  // Scratch layout: header, buffer_count, then one u32 length per buffer.
  const std::size_t prefix = type == MsgType::Ack ? 0 : 4;
  list.scratch_.resize(kHeaderSize + prefix + 4 * buffers.size());
  const auto header = encode_header(list.header_);
  std::copy(header.begin(), header.end(), list.scratch_.begin());
  std::uint8_t* p = list.scratch_.data();
  if (type == MsgType::Ack) {
    list.segments_.emplace_back(p, kHeaderSize);
    return list;
  }
  put_u32(p + kHeaderSize, static_cast<std::uint32_t>(buffers.size()));
  std::uint8_t* lens = p + kHeaderSize + 4;
  for (std::size_t i = 0; i < buffers.size(); ++i) put_u32(lens + 4 * i, static_cast<std::uint32_t>(buffers[i].size()));

  list.segments_.reserve(2 * buffers.size() + 1);
  // Header + count + first length travel together; each later length sits
  // between two payload segments.
  list.segments_.emplace_back(p, kHeaderSize + 4 + (buffers.empty() ? 0 : 4));
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    if (i > 0) list.segments_.emplace_back(lens + 4 * i, 4);
    if (!buffers[i].empty()) list.segments_.push_back(buffers[i]);
  }
  return list;
}

Buffer encode_serialized(std::span<const BufferView> buffers, MsgType type, std::uint64_t request_id) {
  check_encodable(buffers, type);
  std::uint64_t body_length = 0;
  for (const auto& b : buffers) body_length += 1 + varint_size(b.size()) + b.size();
  const FrameHeader h{type, WireMode::Serialized, request_id, body_length};
  Buffer out;
  out.reserve(kHeaderSize + body_length);
  const auto header = encode_header(h);
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& b : buffers) {
    out.push_back(kSerializedTag);
    put_varint(out, b.size());
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

SegmentList encode_frame(WireMode mode, std::span<const BufferView> buffers, MsgType type, std::uint64_t request_id) {
  if (mode == WireMode::NonSerialized) return encode_nonserialized(buffers, type, request_id);
  SegmentList list;
  list.scratch_ = encode_serialized(buffers, type, request_id);
  list.header_ = parse_header(std::span<const std::uint8_t, kHeaderSize>(list.scratch_.data(), kHeaderSize));
  list.segments_.emplace_back(list.scratch_);
  return list;
}

std::uint64_t framing_overhead(WireMode mode, MsgType type, std::span<const std::uint64_t> buffer_lengths) {
  if (type == MsgType::Ack) return kHeaderSize;
  std::uint64_t n = kHeaderSize;
  if (mode == WireMode::NonSerialized) return n + 4 + 4 * buffer_lengths.size();
  for (auto len : buffer_lengths) n += 1 + varint_size(len);
  return n;
}

std::size_t varint_size(std::uint64_t v) {
  std::size_t n = 1;
  while (v >= 0x80) {
    v >>= 7;
    ++n;
  }
  return n;
}

void put_varint(Buffer& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

void SpanSource::read_exact(std::span<std::uint8_t> out) {
  if (out.size() > bytes_.size() - pos_) throw TruncationError("input ends before the frame does");
  std::memcpy(out.data(), bytes_.data() + pos_, out.size());
  pos_ += out.size();
}

Message read_message(ByteSource& src) {
  std::array<std::uint8_t, kHeaderSize> raw;
  src.read_exact(raw);
  Message msg;
  msg.header = parse_header(raw);
  const std::uint64_t body_length = msg.header.body_length;
  if (body_length > src.available_hint()) throw TruncationError("input ends before the declared body does");

  if (msg.header.type == MsgType::Ack) {
    if (body_length != 0) throw MalformedFrameError("ACK frame with a non-empty body");
    return msg;
  }
  if (msg.header.mode == WireMode::NonSerialized) {
    msg.buffers = read_nonserialized_body(src, body_length);
    return msg;
  }
  Buffer body;
  std::uint64_t left = body_length;
  while (left > 0) {
    const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(left, kReadChunk));
    const std::size_t at = body.size();
    body.resize(at + chunk);
    src.read_exact(std::span<std::uint8_t>(body.data() + at, chunk));
    left -= chunk;
  }
  msg.buffers = parse_serialized_body(body);
  return msg;
}

Message decode(std::span<const std::uint8_t> bytes) {
  SpanSource src(bytes);
  return read_message(src);
}

}  // namespace tfgb
